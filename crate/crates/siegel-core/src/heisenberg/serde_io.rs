//! JSON wire format for observables:
//! `{q: [[...]], bump: {radius, order}, phi: [{k, re, im}, ...]}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::symplectic::{matrix_from_rows, matrix_to_rows};
use crate::theta::FourierSeries;

use super::{Bump, Observable};

#[derive(Serialize, Deserialize)]
struct BumpWire {
    radius: f64,
    order: u32,
}

#[derive(Serialize, Deserialize)]
struct ModeWire {
    k: i64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct ObservableWire {
    q: Vec<Vec<f64>>,
    bump: BumpWire,
    phi: Vec<ModeWire>,
}

impl Serialize for Observable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ObservableWire {
            q: matrix_to_rows(&self.q),
            bump: BumpWire {
                radius: self.bump.radius,
                order: self.bump.order,
            },
            phi: self
                .phi
                .modes
                .iter()
                .map(|&(k, c)| ModeWire {
                    k,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Observable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = ObservableWire::deserialize(d)?;
        let q = matrix_from_rows(&wire.q).map_err(serde::de::Error::custom)?;
        let bump = Bump::new(wire.bump.radius, wire.bump.order).map_err(serde::de::Error::custom)?;
        let phi = FourierSeries::new(
            wire.phi
                .iter()
                .map(|m| (m.k, Complex64::new(m.re, m.im)))
                .collect(),
        )
        .map_err(serde::de::Error::custom)?;
        Observable::new(q, bump, phi).map_err(serde::de::Error::custom)
    }
}
