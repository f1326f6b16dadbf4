//! The two linear achievability schemes.

use serde::{Deserialize, Serialize};

use crate::error::{PicodError, Result};
use crate::galois::{vandermonde, FieldElem, GaloisField, Matrix, MAX_W};
use crate::instance::{Instance, SpecS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Send the first `s_max + t` messages uncoded.
    Prefix,
    /// Send `m - s_min` Vandermonde combinations of all messages.
    Mds,
    Custom,
}

/// A linear code given by its `l x m` generator; row `i` is the `i`-th transmission.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearCode {
    pub scheme: Scheme,
    pub gen: Matrix,
}

impl LinearCode {
    pub fn new(scheme: Scheme, gen: Matrix) -> LinearCode {
        LinearCode { scheme, gen }
    }

    /// Code length in message units.
    pub fn len(&self) -> usize {
        self.gen.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.gen.rows() == 0
    }

    pub fn m(&self) -> usize {
        self.gen.cols()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("code serializes")
    }

    pub fn from_json(text: &str) -> Result<LinearCode> {
        serde_json::from_str(text).map_err(|e| {
            PicodError::parse(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })
    }
}

fn size_range(inst: &Instance) -> Result<SpecS> {
    inst.size_range()
        .ok_or_else(|| PicodError::domain("instance has no users"))
}

/// Smallest field exponent with at least `m` nonzero elements.
pub fn min_field_exponent(m: usize) -> u8 {
    (1..=MAX_W).find(|&w| (1usize << w) > m).unwrap_or(MAX_W)
}

/// Unit rows `e_1, ..., e_{s_max + t}` over GF(2).
pub fn scheme_prefix(inst: &Instance, t: u8) -> Result<LinearCode> {
    if t == 0 {
        return Err(PicodError::domain("t must be at least 1"));
    }
    let s_max = size_range(inst)?.s_max;
    let len = s_max as usize + t as usize;
    if len > inst.m() as usize {
        return Err(PicodError::domain(format!(
            "s_max + t = {len} exceeds m = {}",
            inst.m()
        )));
    }
    let units: Vec<usize> = (0..len).collect();
    Ok(LinearCode::new(
        Scheme::Prefix,
        Matrix::unit_rows(1, inst.m() as usize, &units)?,
    ))
}

/// `(m - s_min) x m` Vandermonde generator over GF(2^w) at points `1..=m`.
pub fn scheme_mds(inst: &Instance, w: u8) -> Result<LinearCode> {
    let s_min = size_range(inst)?.s_min;
    let field = GaloisField::get(w)?;
    let m = inst.m() as usize;
    if m as u32 >= field.order() {
        return Err(PicodError::domain(format!(
            "GF(2^{w}) has {} nonzero points, need {m}",
            field.order() - 1
        )));
    }
    let points: Vec<FieldElem> = (1..=m as FieldElem).collect();
    Ok(LinearCode::new(
        Scheme::Mds,
        vandermonde(w, m - s_min as usize, &points)?,
    ))
}

/// The shorter of the two schemes; ties go to the prefix scheme.
pub fn best_scheme(inst: &Instance, t: u8, w: u8) -> Result<LinearCode> {
    let range = size_range(inst)?;
    let prefix_len = range.s_max as usize + t as usize;
    let mds_len = (inst.m() - range.s_min) as usize;
    if prefix_len <= mds_len {
        scheme_prefix(inst, t)
    } else {
        scheme_mds(inst, w)
    }
}
