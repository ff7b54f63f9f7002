//! Measured splitting tables: `temperature_K,vrs_GHz[,vrs_err_GHz]`.

use std::path::Path;

use zeeman_core::vrs_fitting::VrsPoint;

use crate::error::CliError;

const REQUIRED: [&str; 2] = ["temperature_K", "vrs_GHz"];
const OPTIONAL: &str = "vrs_err_GHz";

pub fn read_points(path: &Path) -> Result<Vec<VrsPoint>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_points(&text)
}

pub fn parse_points(text: &str) -> Result<Vec<VrsPoint>, CliError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| CliError::Data(format!("header: {e}")))?.clone();
    let names: Vec<&str> = header.iter().collect();
    let with_errors = match names.as_slice() {
        [a, b] if [*a, *b] == REQUIRED => false,
        [a, b, c] if [*a, *b] == REQUIRED && *c == OPTIONAL => true,
        _ => {
            return Err(CliError::Data(format!(
                "header must be `temperature_K,vrs_GHz[,vrs_err_GHz]`, got `{}`",
                names.join(",")
            )))
        }
    };

    let mut points = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|e| CliError::Data(format!("row {row}: {e}")))?;
        let field = |column: usize| -> Result<f64, CliError> {
            let raw = record.get(column).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Data(format!("row {row}, column {}: `{raw}` is not a number", names[column])))
        };
        let temperature = field(0)?;
        let vrs = field(1)?;
        if temperature < 0.0 || vrs < 0.0 {
            return Err(CliError::Data(format!("row {row}: temperature and splitting must be >= 0")));
        }
        let uncertainty = if with_errors {
            let sigma = field(2)?;
            if sigma <= 0.0 {
                return Err(CliError::Data(format!("row {row}, column {OPTIONAL}: must be positive")));
            }
            Some(sigma * 1e9)
        } else {
            None
        };
        points.push(VrsPoint { temperature, vrs: vrs * 1e9, uncertainty });
    }
    if points.is_empty() {
        return Err(CliError::Data("dataset has no rows".into()));
    }
    Ok(points)
}
