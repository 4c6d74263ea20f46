//! JSON wire formats: matrices as row-major nested arrays, Siegel points as
//! `{"x": [[...]], "y": [[...]]}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Result, SiegelError};

use super::SiegelPoint;

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nr = rows.len();
    if nr == 0 {
        return Err(SiegelError::Serde("empty matrix".into()));
    }
    let nc = rows[0].len();
    if rows.iter().any(|r| r.len() != nc) {
        return Err(SiegelError::Serde("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

#[derive(Serialize, Deserialize)]
struct SiegelPointWire {
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
}

impl Serialize for SiegelPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SiegelPointWire {
            x: matrix_to_rows(self.re()),
            y: matrix_to_rows(self.im()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SiegelPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = SiegelPointWire::deserialize(d)?;
        let x = matrix_from_rows(&wire.x).map_err(serde::de::Error::custom)?;
        let y = matrix_from_rows(&wire.y).map_err(serde::de::Error::custom)?;
        SiegelPoint::new(x, y).map_err(serde::de::Error::custom)
    }
}
