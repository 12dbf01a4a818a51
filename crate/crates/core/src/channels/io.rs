use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Channel;
use crate::divergences::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, HermitianMatrix};

type JsonMatrix = Vec<Vec<[f64; 2]>>;

/// On-disk channel: row-major Kraus matrices with `[re, im]` entries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<JsonMatrix>,
}

/// On-disk state for `replacer:<file>` specs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub matrix: JsonMatrix,
}

fn to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn from_json(m: &JsonMatrix, rows: usize, cols: usize, field: &str) -> Result<ComplexMatrix> {
    if m.len() != rows {
        return Err(Error::Parse(format!("{field}: expected {rows} rows, found {}", m.len())));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Parse(format!(
                "{field}[{i}]: expected {cols} entries, found {}",
                row.len()
            )));
        }
        data.extend(row.iter().map(|&[re, im]| c64(re, im)));
    }
    ComplexMatrix::new(rows, cols, data).map_err(|e| Error::Parse(format!("{field}: {e}")))
}

impl ChannelFile {
    pub fn from_channel(ch: &Channel) -> Self {
        Self {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            kraus: ch.kraus().iter().map(to_json).collect(),
        }
    }

    pub fn to_channel(&self) -> Result<Channel> {
        let kraus = self
            .kraus
            .iter()
            .enumerate()
            .map(|(k, m)| from_json(m, self.dim_out, self.dim_in, &format!("kraus[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        Channel::new(kraus, self.dim_in, self.dim_out)
    }
}

impl Channel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ChannelFile::from_channel(self)).expect("channel serializes")
    }

    pub fn from_json(s: &str) -> Result<Channel> {
        let file: ChannelFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        file.to_channel()
    }
}

pub fn read_state_file(path: &Path) -> Result<DensityMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let file: StateFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let n = file.matrix.len();
    let m = from_json(&file.matrix, n, n, "matrix")?;
    let h = HermitianMatrix::new(m).map_err(|e| Error::Parse(format!("matrix: {e}")))?;
    DensityMatrix::new(h).map_err(|e| Error::Parse(format!("matrix: {e}")))
}

fn number(field: &str, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("{field}: cannot parse {s:?} as a number")))
}

/// Resolves `gad:γ:β`, `identity:d`, `replacer:<statefile>` or a path to a
/// channel JSON file. A replacer takes inputs of the state's dimension.
pub fn parse_channel_spec(spec: &str) -> Result<Channel> {
    let parts: Vec<&str> = spec.splitn(3, ':').collect();
    match parts[0] {
        "gad" => {
            if parts.len() != 3 {
                return Err(Error::Parse(format!("{spec}: expected gad:<gamma>:<beta>")));
            }
            let gamma = number("gamma", parts[1])?;
            let beta = number("beta", parts[2])?;
            Channel::gad(gamma, beta).map_err(|e| Error::Parse(e.to_string()))
        }
        "identity" => {
            let d = parts
                .get(1)
                .ok_or_else(|| Error::Parse(format!("{spec}: expected identity:<d>")))?
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("d: cannot parse {spec:?}")))?;
            if d == 0 {
                return Err(Error::Parse("d: must be positive".into()));
            }
            Ok(Channel::identity(d))
        }
        "replacer" => {
            let path = spec
                .strip_prefix("replacer:")
                .filter(|p| !p.is_empty())
                .ok_or_else(|| Error::Parse(format!("{spec}: expected replacer:<statefile>")))?;
            let omega = read_state_file(Path::new(path))?;
            let d = omega.dim();
            Ok(Channel::replacer(&omega, d))
        }
        _ => {
            let text = fs::read_to_string(spec).map_err(|e| Error::Parse(format!("{spec}: {e}")))?;
            Channel::from_json(&text)
        }
    }
}
