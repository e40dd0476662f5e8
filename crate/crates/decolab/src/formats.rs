//! JSON encodings of states, information types and channels.
//!
//! Matrices are `{"re": [[...]], "im": [[...]]}`, row-major; `im` may be
//! omitted for real matrices. Loading checks every shape and invariant and
//! reports the offending location.

use std::fs;
use std::path::Path;

use decolab_core::channels::QuantumChannel;
use decolab_core::{Complex64, ComplexMatrix, DensityOperator, InfoType};
use serde::{Deserialize, Serialize};

/// Tolerance on the trace of a loaded state.
pub const TRACE_TOL: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: cannot read file: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
}

impl FormatError {
    fn invalid(location: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError::Invalid { location: location.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.rows()).map(|r| (0..m.cols()).map(|c| f(&m[(r, c)])).collect()).collect()
        };
        let im = rows(|z| z.im);
        let real = im.iter().flatten().all(|&x| x == 0.0);
        Self { re: rows(|z| z.re), im: (!real).then_some(im) }
    }

    pub fn to_matrix(&self, location: &str) -> Result<ComplexMatrix, FormatError> {
        let rows = self.re.len();
        if rows == 0 {
            return Err(FormatError::invalid(format!("{location}.re"), "matrix has no rows"));
        }
        let cols = self.re[0].len();
        for (r, row) in self.re.iter().enumerate() {
            if row.len() != cols {
                return Err(FormatError::invalid(
                    format!("{location}.re[{r}]"),
                    format!("row has {} entries, expected {cols}", row.len()),
                ));
            }
        }
        if let Some(im) = &self.im {
            if im.len() != rows {
                return Err(FormatError::invalid(format!("{location}.im"), format!("{} rows, expected {rows}", im.len())));
            }
            for (r, row) in im.iter().enumerate() {
                if row.len() != cols {
                    return Err(FormatError::invalid(
                        format!("{location}.im[{r}]"),
                        format!("row has {} entries, expected {cols}", row.len()),
                    ));
                }
            }
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let re = self.re[r][c];
                let im = self.im.as_ref().map_or(0.0, |m| m[r][c]);
                if !re.is_finite() || !im.is_finite() {
                    return Err(FormatError::invalid(format!("{location}[{r}][{c}]"), "entry is not finite"));
                }
                data.push(Complex64::new(re, im));
            }
        }
        ComplexMatrix::new(rows, cols, data).map_err(|e| FormatError::invalid(location, e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub dims: Vec<usize>,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfoTypeJson {
    pub subsystem: usize,
    pub projectors: Vec<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<MatrixJson>,
}

impl StateJson {
    pub fn from_state(rho: &DensityOperator) -> Self {
        Self { dims: rho.dims().to_vec(), matrix: MatrixJson::from_matrix(rho.matrix()) }
    }

    pub fn to_state(&self, location: &str) -> Result<DensityOperator, FormatError> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(FormatError::invalid(format!("{location}.dims"), format!("invalid factor dimensions {:?}", self.dims)));
        }
        let m = self.matrix.to_matrix(&format!("{location}.matrix"))?;
        let d: usize = self.dims.iter().product();
        if m.rows() != d || m.cols() != d {
            return Err(FormatError::invalid(
                format!("{location}.matrix"),
                format!("matrix is {}x{} but dims {:?} require {d}x{d}", m.rows(), m.cols(), self.dims),
            ));
        }
        let deviation = m.hermitian_deviation();
        if deviation > decolab_core::qmat::HERMITIAN_TOL {
            return Err(FormatError::invalid(
                format!("{location}.matrix"),
                format!("hermiticity invariant violated (max deviation {deviation:.3e})"),
            ));
        }
        let trace = m.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(FormatError::invalid(
                format!("{location}.matrix"),
                format!("trace invariant violated: trace is {trace}, expected 1"),
            ));
        }
        DensityOperator::new(m.scale(1.0 / trace).hermitian_part(), self.dims.clone())
            .map_err(|e| FormatError::invalid(format!("{location}.matrix"), format!("positivity invariant violated: {e}")))
    }
}

impl InfoTypeJson {
    pub fn from_info_type(z: &InfoType) -> Self {
        Self { subsystem: z.subsystem(), projectors: z.projectors().iter().map(MatrixJson::from_matrix).collect() }
    }

    pub fn to_info_type(&self, location: &str) -> Result<InfoType, FormatError> {
        let projectors = self
            .projectors
            .iter()
            .enumerate()
            .map(|(k, p)| p.to_matrix(&format!("{location}.projectors[{k}]")))
            .collect::<Result<Vec<_>, _>>()?;
        InfoType::from_projectors(projectors, self.subsystem).map_err(|e| FormatError::invalid(format!("{location}.projectors"), e.to_string()))
    }
}

impl ChannelJson {
    pub fn from_channel(ch: &QuantumChannel) -> Self {
        Self { d_in: ch.d_in(), d_out: ch.d_out(), kraus: ch.kraus().iter().map(MatrixJson::from_matrix).collect() }
    }

    pub fn to_channel(&self, location: &str) -> Result<QuantumChannel, FormatError> {
        let kraus = self
            .kraus
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let loc = format!("{location}.kraus[{k}]");
                let op = m.to_matrix(&loc)?;
                if op.rows() != self.d_out || op.cols() != self.d_in {
                    return Err(FormatError::invalid(
                        loc,
                        format!("operator is {}x{}, expected d_out x d_in = {}x{}", op.rows(), op.cols(), self.d_out, self.d_in),
                    ));
                }
                Ok(op)
            })
            .collect::<Result<Vec<_>, _>>()?;
        QuantumChannel::new(kraus).map_err(|e| FormatError::invalid(format!("{location}.kraus"), e.to_string()))
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, location: &str) -> Result<T, FormatError> {
    serde_json::from_str(text)
        .map_err(|e| FormatError::invalid(format!("{location}:{}:{}", e.line(), e.column()), e.to_string()))
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

pub fn parse_state(text: &str, location: &str) -> Result<DensityOperator, FormatError> {
    parse::<StateJson>(text, location)?.to_state(location)
}

pub fn parse_info_type(text: &str, location: &str) -> Result<InfoType, FormatError> {
    parse::<InfoTypeJson>(text, location)?.to_info_type(location)
}

pub fn parse_channel(text: &str, location: &str) -> Result<QuantumChannel, FormatError> {
    parse::<ChannelJson>(text, location)?.to_channel(location)
}

pub fn read_state(path: &Path) -> Result<DensityOperator, FormatError> {
    parse_state(&read(path)?, &path.display().to_string())
}

pub fn read_info_type(path: &Path) -> Result<InfoType, FormatError> {
    parse_info_type(&read(path)?, &path.display().to_string())
}

pub fn read_channel(path: &Path) -> Result<QuantumChannel, FormatError> {
    parse_channel(&read(path)?, &path.display().to_string())
}

pub fn state_to_string(rho: &DensityOperator) -> String {
    serde_json::to_string_pretty(&StateJson::from_state(rho)).expect("states serialize")
}

pub fn info_type_to_string(z: &InfoType) -> String {
    serde_json::to_string_pretty(&InfoTypeJson::from_info_type(z)).expect("information types serialize")
}

pub fn channel_to_string(ch: &QuantumChannel) -> String {
    serde_json::to_string_pretty(&ChannelJson::from_channel(ch)).expect("channels serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_round_trip() {
        let rho = DensityOperator::maximally_mixed(&[2, 3]);
        let back = parse_state(&state_to_string(&rho), "mem").unwrap();
        assert_eq!(back.dims(), rho.dims());
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn errors_name_the_location() {
        let bad_trace = r#"{"dims":[2],"matrix":{"re":[[0.5,0],[0,0.4]]}}"#;
        let e = parse_state(bad_trace, "f.json").unwrap_err().to_string();
        assert!(e.contains("f.json.matrix") && e.contains("trace"), "{e}");
        let ragged = r#"{"dims":[2],"matrix":{"re":[[0.5,0],[0]]}}"#;
        let e = parse_state(ragged, "f.json").unwrap_err().to_string();
        assert!(e.contains("f.json.matrix.re[1]"), "{e}");
        let syntax = "{\"dims\": [2],\n \"matrix\": }";
        let e = parse_state(syntax, "f.json").unwrap_err().to_string();
        assert!(e.starts_with("f.json:2:"), "{e}");
        let kraus = r#"{"d_in":2,"d_out":2,"kraus":[{"re":[[0.9,0],[0,0.9]]}]}"#;
        let e = parse_channel(kraus, "c.json").unwrap_err().to_string();
        assert!(e.contains("trace preserving"), "{e}");
    }

    #[test]
    fn info_type_and_channel_round_trip() {
        let z = InfoType::standard(3, 1);
        let back = parse_info_type(&info_type_to_string(&z), "mem").unwrap();
        assert_eq!(back.subsystem(), 1);
        assert_eq!(back.n(), 3);
        let ch = QuantumChannel::phase_flip(0.3).unwrap();
        let back = parse_channel(&channel_to_string(&ch), "mem").unwrap();
        assert_eq!(back.kraus().len(), 2);
    }
}
