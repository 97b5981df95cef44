//! Prescribed error targets `eps_n`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-increasing positive target sequence.
///
/// Convergence to zero is a property of the generator family and is never
/// checked: no finite prefix can witness it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ErrorSequence {
    /// `eps_n = (n + 2)^(-alpha)`.
    Power { alpha: f64 },
    /// `eps_n = 1 / ln(n + 2)`.
    Logarithmic,
    /// `eps_n = rho^(-n)`.
    Geometric { rho: f64 },
    Explicit { values: Vec<f64> },
}

impl ErrorSequence {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidSequence(format!("power exponent must be > 0, got {alpha}")));
        }
        Ok(ErrorSequence::Power { alpha })
    }

    pub fn geometric(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 1.0) {
            return Err(Error::InvalidSequence(format!("geometric ratio must be > 1, got {rho}")));
        }
        Ok(ErrorSequence::Geometric { rho })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSequence("explicit sequence is empty".into()));
        }
        check_terms(&values)?;
        Ok(ErrorSequence::Explicit { values })
    }

    /// Reads a one-column CSV of decimal reals. A non-numeric first row is
    /// treated as a header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|source| Error::Csv { path: path.to_owned(), source })?;
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|source| Error::Csv { path: path.to_owned(), source })?;
            let Some(field) = record.get(0).filter(|f| !f.is_empty()) else {
                continue;
            };
            match field.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if row == 0 => continue,
                Err(_) => {
                    return Err(Error::InvalidSequence(format!(
                        "{}: row {}: `{field}` is not a real number",
                        path.display(),
                        row + 1
                    )))
                }
            }
        }
        Self::explicit(values)
    }

    pub fn term(&self, n: usize) -> Result<f64> {
        let v = match self {
            ErrorSequence::Power { alpha } => (n as f64 + 2.0).powf(-alpha),
            ErrorSequence::Logarithmic => 1.0 / (n as f64 + 2.0).ln(),
            ErrorSequence::Geometric { rho } => rho.powf(-(n as f64)),
            ErrorSequence::Explicit { values } => *values.get(n).ok_or_else(|| {
                Error::InvalidSequence(format!(
                    "explicit sequence has {} terms, index {n} requested",
                    values.len()
                ))
            })?,
        };
        Ok(v)
    }

    /// Returns `[eps_0, ..., eps_{n_max}]`, verified positive and non-increasing.
    pub fn materialize(&self, n_max: usize) -> Result<Vec<f64>> {
        match self {
            ErrorSequence::Power { alpha } if !(alpha.is_finite() && *alpha > 0.0) => {
                return Err(Error::InvalidSequence(format!("power exponent must be > 0, got {alpha}")))
            }
            ErrorSequence::Geometric { rho } if !(rho.is_finite() && *rho > 1.0) => {
                return Err(Error::InvalidSequence(format!("geometric ratio must be > 1, got {rho}")))
            }
            _ => {}
        }
        let terms = (0..=n_max).map(|n| self.term(n)).collect::<Result<Vec<_>>>()?;
        check_terms(&terms)?;
        Ok(terms)
    }
}

fn check_terms(values: &[f64]) -> Result<()> {
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidSequence(format!("term {i} = {v} is not a positive real")));
    }
    if let Some(i) = values.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::InvalidSequence(format!(
            "not non-increasing: eps_{} = {} < eps_{} = {}",
            i,
            values[i],
            i + 1,
            values[i + 1]
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn power_terms() {
        let eps = ErrorSequence::power(1.0).unwrap().materialize(2).unwrap();
        assert_eq!(eps, vec![0.5, 1.0 / 3.0, 0.25]);
    }

    #[test]
    fn geometric_terms() {
        let eps = ErrorSequence::geometric(2.0).unwrap().materialize(3).unwrap();
        assert_eq!(eps, vec![1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn logarithmic_terms() {
        let eps = ErrorSequence::Logarithmic.materialize(1).unwrap();
        assert_eq!(eps[0], 1.0 / 2f64.ln());
        assert_eq!(eps[1], 1.0 / 3f64.ln());
    }

    #[test]
    fn rejects_increasing_explicit() {
        let err = ErrorSequence::explicit(vec![0.5, 0.6]).unwrap_err();
        assert!(err.to_string().contains("not non-increasing"), "{err}");
    }

    #[test]
    fn rejects_non_positive_and_bad_parameters() {
        assert!(ErrorSequence::explicit(vec![0.5, 0.0]).is_err());
        assert!(ErrorSequence::explicit(vec![]).is_err());
        assert!(ErrorSequence::power(0.0).is_err());
        assert!(ErrorSequence::geometric(1.0).is_err());
        assert!(ErrorSequence::Geometric { rho: 0.5 }.materialize(3).is_err());
    }

    #[test]
    fn explicit_too_short() {
        let seq = ErrorSequence::explicit(vec![0.5, 0.4]).unwrap();
        assert!(seq.materialize(1).is_ok());
        assert!(seq.materialize(2).is_err());
    }

    #[test]
    fn geometric_underflow_is_rejected() {
        let seq = ErrorSequence::geometric(2.0).unwrap();
        assert!(seq.materialize(2000).is_err());
    }

    #[test]
    fn csv_with_header() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "eps\n0.5\n0.25\n\n0.125").unwrap();
        let seq = ErrorSequence::from_csv(file.path()).unwrap();
        assert_eq!(seq.materialize(2).unwrap(), vec![0.5, 0.25, 0.125]);
    }

    #[test]
    fn csv_increasing_is_rejected() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "0.5\n0.6").unwrap();
        assert!(ErrorSequence::from_csv(file.path()).is_err());
    }
}
