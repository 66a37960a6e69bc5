//! Problem specifications read from JSON.

use serde::{Deserialize, Serialize};
use tileforge_core::boxtile::{box_digits, build_cyclic_matrix, BoxForm};
use tileforge_core::oned::{attractor_system, tiling_oracle, IntSet1D, TilingVerdict};
use tileforge_core::{DigitSet, IntMatrix, RealMatrix, ShiftSet};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Attractor,
    Boxform,
    Oned,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "ser_matrix")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digits: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shifts: Option<Vec<Vec<f64>>>,
    /// Integer translates drawn by `tile render --tiling`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translates: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "is_default_params")]
    pub params: Params,
}

/// Writes integral entries without a fractional part.
fn ser_matrix<S: serde::Serializer>(m: &Option<Vec<Vec<f64>>>, s: S) -> Result<S::Ok, S::Error> {
    let rows: Option<Vec<Vec<serde_json::Value>>> = m.as_ref().map(|rows| {
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|&v| {
                        if v.fract() == 0.0 && v.abs() < 9.0e15 {
                            serde_json::Value::from(v as i64)
                        } else {
                            serde_json::Value::from(v)
                        }
                    })
                    .collect()
            })
            .collect()
    });
    rows.serialize(s)
}

fn is_default_params(p: &Params) -> bool {
    p.depth.is_none() && p.resolution.is_none() && p.tol.is_none() && p.window.is_none()
}

/// A validated specification.
pub enum System {
    Int {
        matrix: IntMatrix,
        digits: DigitSet,
        translates: Option<Vec<Vec<i64>>>,
    },
    Real {
        matrix: RealMatrix,
        shifts: ShiftSet,
    },
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let spec: ProblemSpec =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed spec: {e}")))?;
        spec.check_fields()?;
        Ok(spec)
    }

    fn check_fields(&self) -> Result<(), CliError> {
        let present = |name: &str| -> bool {
            match name {
                "matrix" => self.matrix.is_some(),
                "digits" => self.digits.is_some(),
                "shifts" => self.shifts.is_some(),
                "translates" => self.translates.is_some(),
                "p" => self.p.is_some(),
                "sign" => self.sign.is_some(),
                "set" => self.set.is_some(),
                _ => false,
            }
        };
        let (required, allowed): (&[&str], &[&str]) = match self.kind {
            Kind::Attractor => (&["matrix"], &["matrix", "digits", "shifts", "translates"]),
            Kind::Boxform => (&["p", "sign"], &["p", "sign", "translates"]),
            Kind::Oned => (&["set"], &["set"]),
        };
        for f in required {
            if !present(f) {
                return Err(CliError::Input(format!("kind {:?} needs field `{f}`", self.kind)));
            }
        }
        for f in ["matrix", "digits", "shifts", "translates", "p", "sign", "set"] {
            if present(f) && !allowed.contains(&f) {
                return Err(CliError::Input(format!("field `{f}` is not allowed for kind {:?}", self.kind)));
            }
        }
        if self.kind == Kind::Attractor && self.digits.is_some() == self.shifts.is_some() {
            return Err(CliError::Input("attractor specs need exactly one of `digits` and `shifts`".into()));
        }
        Ok(())
    }

    pub fn oned_set(&self) -> Result<IntSet1D, CliError> {
        let set = self
            .set
            .clone()
            .ok_or_else(|| CliError::Input("spec has no `set`".into()))?;
        Ok(IntSet1D::new(set)?)
    }

    pub fn box_form(&self) -> Result<BoxForm, CliError> {
        match (&self.p, self.sign) {
            (Some(p), Some(sign)) => Ok(BoxForm::new(p.clone(), sign)?),
            _ => Err(CliError::Input("spec has no box form".into())),
        }
    }

    /// Resolves the spec into an attractor system.
    pub fn system(&self) -> Result<System, CliError> {
        match self.kind {
            Kind::Attractor => {
                let rows = self.matrix.clone().unwrap_or_default();
                if let Some(digits) = &self.digits {
                    let matrix = IntMatrix::new(integer_rows(&rows)?)?;
                    Ok(System::Int {
                        matrix,
                        digits: DigitSet::new(digits.clone())?,
                        translates: self.translates.clone(),
                    })
                } else {
                    let matrix = RealMatrix::new(rows)?;
                    let shifts = ShiftSet::new(self.shifts.clone().unwrap_or_default())?;
                    Ok(System::Real { matrix, shifts })
                }
            }
            Kind::Boxform => {
                let form = self.box_form()?;
                Ok(System::Int {
                    matrix: build_cyclic_matrix(&form)?,
                    digits: box_digits(&form)?,
                    translates: self.translates.clone(),
                })
            }
            Kind::Oned => {
                let y = self.oned_set()?;
                let (matrix, digits) = attractor_system(&y)?;
                let TilingVerdict::Tiling { shifts, .. } = tiling_oracle(&y, None)? else {
                    unreachable!("attractor_system succeeded, so Y tiles a segment");
                };
                Ok(System::Int {
                    matrix,
                    digits,
                    translates: Some(shifts.elements().iter().map(|&l| vec![l]).collect()),
                })
            }
        }
    }

    pub fn int_system(&self) -> Result<(IntMatrix, DigitSet), CliError> {
        match self.system()? {
            System::Int { matrix, digits, .. } => Ok((matrix, digits)),
            System::Real { .. } => Err(CliError::Input(
                "this command needs an integer matrix with integer digits".into(),
            )),
        }
    }

    pub fn from_int_system(matrix: &IntMatrix, digits: &DigitSet, translates: Option<Vec<Vec<i64>>>) -> Self {
        ProblemSpec {
            kind: Kind::Attractor,
            matrix: Some(
                matrix
                    .rows()
                    .into_iter()
                    .map(|r| r.into_iter().map(|v| v as f64).collect())
                    .collect(),
            ),
            digits: Some(digits.digits().to_vec()),
            shifts: None,
            translates,
            p: None,
            sign: None,
            set: None,
            params: Params::default(),
        }
    }

    pub fn from_real_system(matrix: &RealMatrix, shifts: &ShiftSet) -> Self {
        let d = matrix.dim();
        ProblemSpec {
            kind: Kind::Attractor,
            matrix: Some(matrix.entries().chunks(d).map(<[f64]>::to_vec).collect()),
            digits: None,
            shifts: Some(shifts.shifts().to_vec()),
            translates: None,
            p: None,
            sign: None,
            set: None,
            params: Params::default(),
        }
    }
}

fn integer_rows(rows: &[Vec<f64>]) -> Result<Vec<Vec<i64>>, CliError> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|&v| {
                    if v.fract() == 0.0 && v.abs() < 9.0e15 {
                        Ok(v as i64)
                    } else {
                        Err(CliError::Input(format!(
                            "integer digits need an integer matrix, found entry {v}"
                        )))
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_rules() {
        assert!(ProblemSpec::parse(r#"{"kind":"oned","set":[0,3]}"#).is_ok());
        assert!(ProblemSpec::parse(r#"{"kind":"oned"}"#).is_err());
        assert!(ProblemSpec::parse(r#"{"kind":"oned","set":[0,3],"p":[2]}"#).is_err());
        assert!(ProblemSpec::parse(r#"{"kind":"attractor","matrix":[[2]]}"#).is_err());
        assert!(ProblemSpec::parse(r#"{"kind":"attractor","matrix":[[2]],"digits":[[0],[1]],"x":1}"#).is_err());
    }

    #[test]
    fn integer_matrix_required_for_digits() {
        let s = ProblemSpec::parse(r#"{"kind":"attractor","matrix":[[2.5]],"digits":[[0],[1]]}"#).unwrap();
        assert!(s.system().is_err());
        let s = ProblemSpec::parse(r#"{"kind":"attractor","matrix":[[2.5]],"shifts":[[0],[1]]}"#).unwrap();
        assert!(matches!(s.system().unwrap(), System::Real { .. }));
    }
}
