#![allow(clippy::excessive_precision)]
#![allow(dead_code)]

use num_complex::Complex64;
use zeeman_core::constants::{BOHR_MAGNETON, PLANCK, SPEED_OF_LIGHT};
use zeeman_core::spin_ladder::SpinSystem;

/// Free-standing slab by explicit summation of 200 internal round trips.
/// `eps` and `mu` are the slab's relative constants, `omega` in rad/s.
pub fn airy_slab(eps: Complex64, mu: Complex64, thickness: f64, omega: f64) -> (Complex64, Complex64) {
    let mut n = (eps * mu).sqrt();
    if n.im < 0.0 {
        n = -n;
    }
    let z = mu / n;
    let one = Complex64::new(1.0, 0.0);
    let r12 = (z - one) / (z + one);
    let r21 = (one - z) / (one + z);
    let t12 = 2.0 * z / (z + one);
    let t21 = 2.0 / (one + z);
    let phase = Complex64::i() * n * omega * thickness / SPEED_OF_LIGHT;
    let single = phase.exp();
    let round_trip = r21 * r21 * (2.0 * phase).exp();
    let mut t = Complex64::new(0.0, 0.0);
    let mut r = r12;
    let mut term = Complex64::new(1.0, 0.0);
    for _ in 0..200 {
        t += t12 * t21 * single * term;
        r += t12 * t21 * r21 * (2.0 * phase).exp() * term;
        term *= round_trip;
    }
    (t, r)
}

/// Boltzmann populations from 50-digit arithmetic, pure Zeeman ladder with
/// s = 7/2: (g, B in T, T in K, P from m = −7/2 to 7/2).
pub const POPULATION_TABLE: [(f64, f64, f64, [f64; 8]); 8] = [
    (2.0, 7.8, 1.5, [9.9907509884212129e-1, 9.2404571572686704e-4, 8.5465095240864287e-7, 7.9046765546489814e-10, 7.3110444980515541e-13, 6.7619935215506723e-16, 6.2541756376505689e-19, 5.7844942888398458e-22]),
    (2.0, 7.8, 250.0, [1.4408575624582244e-1, 1.3817122953055047e-1, 1.3249948619079817e-1, 1.2706056029517892e-1, 1.2184489500040035e-1, 1.1684332575874763e-1, 1.1204706421487712e-1, 1.074476827636249e-1]),
    (2.0023, 0.5, 0.3, [8.9371393484145776e-1, 9.4989350519585683e-2, 1.0096045681254106e-2, 1.073069116068468e-3, 1.1405230960850106e-4, 1.2122172870552918e-5, 1.2884182320198822e-6, 1.3694092291273537e-7]),
    (2.0, 30.0, 400.0, [1.7320217815125263e-1, 1.5660120834274278e-1, 1.4159139749958028e-1, 1.2802023725133804e-1, 1.157498367507635e-1, 1.0465552162291722e-1, 9.4624567201323914e-2, 8.5555053180081628e-2]),
    (2.0, 30.0, 0.8, [1.0, 1.3209297885902405e-22, 1.7448555063850574e-44, 2.3048316151697308e-66, 3.0445207381622549e-88, 4.0215981350192702e-110, 5.3122487742859099e-132, 7.017107650356251e-154]),
    (2.0206, 21.5, 12.0, [9.1211853668603785e-1, 8.0158314679685391e-2, 7.0444302509544886e-3, 6.1907486152698495e-4, 5.4405206740846989e-5, 4.7812093568352428e-6, 4.2017969020464728e-7, 3.6926007393521711e-8]),
    (2.0, 0.001, 100.0, [1.2500587757484601e-1, 1.2500419822262645e-1, 1.2500251889296762e-1, 1.2500083958586921e-1, 1.2499916030133093e-1, 1.2499748103935247e-1, 1.2499580179993352e-1, 1.249941225830738e-1]),
    (2.0, 15.0, 4.2, [9.9175341270887415e-1, 8.1785810891757166e-3, 6.7445382869438882e-5, 5.561942372162335e-7, 4.5867043280248414e-9, 3.7824657619641705e-11, 3.1192434081732478e-13, 2.5723113047769666e-15]),
];

/// GGG with 𝔤 = 2.0, zero detuning with the first mode of the 180 µm slab near 7.8 T.
pub fn sample_one_spins() -> SpinSystem {
    SpinSystem::gd_ggg().with_g_factor(2.0).unwrap()
}

/// 𝔤 fixed so the lowest transition sits at 608 GHz at 21.5 T.
pub fn sample_two_g_factor() -> f64 {
    608e9 * PLANCK / (BOHR_MAGNETON * 21.5)
}

pub fn sample_two_spins() -> SpinSystem {
    SpinSystem::gd_ggg().with_g_factor(sample_two_g_factor()).unwrap()
}
