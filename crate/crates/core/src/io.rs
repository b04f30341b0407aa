//! JSON state files: `{"dims":[d0,...],"matrix":[[[re,im],...],...]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::states::DensityMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_matrix(m: &ComplexMatrix, dims: &[usize]) -> Self {
        let matrix = (0..m.rows())
            .map(|r| m.row(r).iter().map(|z| [z.re, z.im]).collect())
            .collect();
        Self {
            dims: dims.to_vec(),
            matrix,
        }
    }

    pub fn from_state(rho: &DensityMatrix) -> Self {
        Self::from_matrix(rho.matrix(), rho.dims())
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let n = self.matrix.len();
        if n == 0 {
            return Err(Error::Parse("field `matrix`: empty".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for (r, row) in self.matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parse(format!(
                    "field `matrix`: row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (c, &[re, im]) in row.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::Parse(format!(
                        "field `matrix`: entry ({r},{c}) is not finite"
                    )));
                }
                data.push(C64::new(re, im));
            }
        }
        Ok(ComplexMatrix::from_vec(n, n, data))
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        let product: usize = self.dims.iter().product();
        if self.dims.is_empty() || self.dims.contains(&0) || product != self.matrix.len() {
            return Err(Error::Parse(format!(
                "field `dims`: {:?} does not match a {}x{} matrix",
                self.dims,
                self.matrix.len(),
                self.matrix.len()
            )));
        }
        DensityMatrix::validate(self.to_matrix()?, &self.dims)
    }
}

pub fn parse_state(text: &str) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_state()
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    parse_state(&std::fs::read_to_string(path)?)
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string(&StateFile::from_state(rho)).expect("state serializes")
}

pub fn write_state(path: &Path, rho: &DensityMatrix) -> Result<()> {
    std::fs::write(path, state_to_json(rho) + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{named_state, random_state, NamedState};
    use proptest::prelude::*;

    #[test]
    fn parses_bell_file() {
        let text = r#"{ "dims": [2, 2],
            "matrix": [[[0.5,0],[0,0],[0,0],[0.5,0]],
                       [[0,0],[0,0],[0,0],[0,0]],
                       [[0,0],[0,0],[0,0],[0,0]],
                       [[0.5,0],[0,0],[0,0],[0.5,0]]] }"#;
        let s = parse_state(text).unwrap();
        assert!(
            s.matrix()
                .max_abs_diff(named_state(&NamedState::Bell).unwrap().matrix())
                < 1e-15
        );
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse_state(r#"{"matrix": [[[1,0]]]}"#)
            .unwrap_err()
            .to_string();
        assert!(e.contains("dims"), "{e}");
        let e = parse_state(r#"{"dims":[2],"matrix":[[[1,0],[0,0]],[[0,0]]]}"#)
            .unwrap_err()
            .to_string();
        assert!(e.contains("matrix") && e.contains("row 1"), "{e}");
        let e = parse_state(r#"{"dims":[3],"matrix":[[[1,0]]]}"#)
            .unwrap_err()
            .to_string();
        assert!(e.contains("dims"), "{e}");
        let e = parse_state(r#"{"dims":[2],"matrix":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#)
            .unwrap_err()
            .to_string();
        assert!(e.contains("TraceNotOne"), "{e}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip_is_exact(seed in any::<u64>(), three in any::<bool>()) {
            let dims: &[usize] = if three { &[2, 3] } else { &[2, 2] };
            let s = random_state(dims, seed);
            let back = parse_state(&state_to_json(&s)).unwrap();
            prop_assert!(back.matrix().max_abs_diff(s.matrix()) <= 1e-15);
            prop_assert_eq!(back.dims(), s.dims());
        }
    }
}
