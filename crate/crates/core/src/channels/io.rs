//! Channel ingestion: the JSON Kraus file format and built-in URIs.
//!
//! ```json
//! {"dim_in": 2, "dim_out": 2, "kraus": [[[[0.7071, 0.0], [0.7071, 0.0]], [[0.7071, 0.0], [-0.7071, 0.0]]]]}
//! ```
//!
//! `kraus` is a list of matrices, each a list of rows, each row a list of
//! `[re, im]` pairs.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{dephasing, from_kraus, hadamard, identity, mixture, qft, swap, Channel, KrausSet};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChannelFile {
    pub fn from_channel(ch: &Channel) -> Result<Self> {
        let ks = ch.to_kraus()?;
        let kraus = ks
            .operators()
            .iter()
            .map(|k| {
                (0..k.rows())
                    .map(|r| {
                        (0..k.cols())
                            .map(|c| [k[(r, c)].re, k[(r, c)].im])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            kraus,
        })
    }

    pub fn to_channel(&self) -> Result<Channel> {
        if self.kraus.is_empty() {
            return Err(Error::Validation(
                "channel file has no Kraus operators".into(),
            ));
        }
        let mut ops = Vec::with_capacity(self.kraus.len());
        for (n, m) in self.kraus.iter().enumerate() {
            if m.len() != self.dim_out || m.iter().any(|row| row.len() != self.dim_in) {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {n} is not {}x{}",
                    self.dim_out, self.dim_in
                )));
            }
            let data = m
                .iter()
                .flatten()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect();
            ops.push(ComplexMatrix::from_row_major(
                self.dim_out,
                self.dim_in,
                data,
            )?);
        }
        Ok(from_kraus(&KrausSet::new(ops)?))
    }
}

pub fn parse_channel_json(text: &str) -> Result<Channel> {
    let file: ChannelFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("channel JSON: {e}")))?;
    file.to_channel()
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("bad {what} '{s}'")))
}

/// Resolves a built-in channel URI or a path to a channel JSON file.
///
/// Built-ins: `hadamard`, `qft:<d>`, `mix:hadamard:<p1>` (Hadamard with
/// probability `p1`, identity otherwise), `swap:<dA>:<dB>`, `id:<d>`,
/// `dephase:<d>`.
pub fn resolve_channel(uri: &str) -> Result<Channel> {
    let parts: Vec<&str> = uri.split(':').collect();
    match parts.as_slice() {
        ["hadamard"] => Ok(hadamard()),
        ["qft", d] => {
            let d: usize = parse_num(d, "dimension")?;
            if d == 0 {
                return Err(Error::Validation("qft dimension must be positive".into()));
            }
            Ok(qft(d))
        }
        ["mix", "hadamard", p] => {
            let p: f64 = parse_num(p, "probability")?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbabilities(format!(
                    "p1 = {p} outside [0, 1]"
                )));
            }
            mixture(&[hadamard(), identity(2)], &[p, 1.0 - p])
        }
        ["swap", a, b] => {
            let (a, b): (usize, usize) = (parse_num(a, "dimension")?, parse_num(b, "dimension")?);
            if a == 0 || b == 0 {
                return Err(Error::Validation("swap dimensions must be positive".into()));
            }
            Ok(swap(a, b))
        }
        ["id", d] => Ok(identity(parse_num::<usize>(d, "dimension")?.max(1))),
        ["dephase", d] => Ok(dephasing(parse_num::<usize>(d, "dimension")?.max(1))),
        _ => {
            let path = Path::new(uri);
            if !path.exists() {
                return Err(Error::Parse(format!(
                    "'{uri}' is neither a built-in channel nor an existing file"
                )));
            }
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("reading {uri}: {e}")))?;
            parse_channel_json(&text)
        }
    }
}
