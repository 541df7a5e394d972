use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalerKind {
    Standard,
    #[serde(rename = "minmax")]
    MinMax,
}

impl std::fmt::Display for ScalerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScalerKind::Standard => "standard",
            ScalerKind::MinMax => "minmax",
        })
    }
}

/// Per-column statistics of a fitted scaler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalerParams {
    Standard { mean: Vec<f64>, std: Vec<f64> },
    #[serde(rename = "minmax")]
    MinMax { min: Vec<f64>, max: Vec<f64> },
}

impl ScalerParams {
    pub fn kind(&self) -> ScalerKind {
        match self {
            ScalerParams::Standard { .. } => ScalerKind::Standard,
            ScalerParams::MinMax { .. } => ScalerKind::MinMax,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            ScalerParams::Standard { mean, .. } => mean.len(),
            ScalerParams::MinMax { min, .. } => min.len(),
        }
    }

    /// Column offset and divisor; a zero divisor marks a degenerate column.
    fn column(&self, j: usize) -> (f64, f64) {
        match self {
            ScalerParams::Standard { mean, std } => (mean[j], std[j]),
            ScalerParams::MinMax { min, max } => (min[j], max[j] - min[j]),
        }
    }

    fn check(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: x.ncols(),
            });
        }
        Ok(())
    }

    /// Standard: `(x - mean) / std`; minmax: `(x - min) / (max - min)`.
    /// Degenerate columns map to 0.
    pub fn apply(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check(&x)?;
        let mut out = x.to_owned();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (offset, scale) = self.column(j);
            if scale > 0.0 {
                col.mapv_inplace(|v| (v - offset) / scale);
            } else {
                col.fill(0.0);
            }
        }
        Ok(out)
    }

    /// Inverse of [`apply`](Self::apply) on non-degenerate columns;
    /// degenerate columns come back as their constant value.
    pub fn invert(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check(&x)?;
        let mut out = x.to_owned();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (offset, scale) = self.column(j);
            if scale > 0.0 {
                col.mapv_inplace(|v| v * scale + offset);
            } else {
                col.fill(offset);
            }
        }
        Ok(out)
    }
}

/// Fit per-column statistics; the standard scaler uses the population
/// standard deviation.
pub fn fit_scaler(x: ArrayView2<f64>, kind: ScalerKind) -> Result<ScalerParams> {
    if x.nrows() == 0 {
        return Err(Error::invalid("cannot fit a scaler on zero rows"));
    }
    Ok(match kind {
        ScalerKind::Standard => {
            let mean = x.mean_axis(Axis(0)).expect("non-empty").to_vec();
            let std = x.std_axis(Axis(0), 0.0).to_vec();
            ScalerParams::Standard { mean, std }
        }
        ScalerKind::MinMax => {
            let fold = |init: f64, f: fn(f64, f64) -> f64| -> Vec<f64> {
                x.columns()
                    .into_iter()
                    .map(|c| c.iter().copied().fold(init, f))
                    .collect()
            };
            ScalerParams::MinMax {
                min: fold(f64::INFINITY, f64::min),
                max: fold(f64::NEG_INFINITY, f64::max),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn standard_uses_population_std() {
        let x = array![[1.0], [2.0], [3.0]];
        match fit_scaler(x.view(), ScalerKind::Standard).unwrap() {
            ScalerParams::Standard { mean, std } => {
                assert_eq!(mean, vec![2.0]);
                assert!((std[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn minmax_maps_into_unit_interval() {
        let x = array![[2.0], [4.0], [6.0]];
        let p = fit_scaler(x.view(), ScalerKind::MinMax).unwrap();
        assert_eq!(p, ScalerParams::MinMax { min: vec![2.0], max: vec![6.0] });
        assert_eq!(p.apply(x.view()).unwrap(), array![[0.0], [0.5], [1.0]]);
    }

    #[test]
    fn single_row_and_constant_columns_map_to_zero() {
        let one = array![[3.0, -1.0]];
        let p = fit_scaler(one.view(), ScalerKind::Standard).unwrap();
        assert!(matches!(&p, ScalerParams::Standard { std, .. } if std == &vec![0.0, 0.0]));
        let x = array![[5.0, 1.0], [5.0, 2.0]];
        for kind in [ScalerKind::Standard, ScalerKind::MinMax] {
            let p = fit_scaler(x.view(), kind).unwrap();
            let out = p.apply(x.view()).unwrap();
            assert!(out.column(0).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn column_mismatch_is_an_error() {
        let p = fit_scaler(array![[1.0, 2.0]].view(), ScalerKind::MinMax).unwrap();
        assert!(p.apply(array![[1.0]].view()).is_err());
    }

    #[test]
    fn serializes_with_kind_tag() {
        let p = fit_scaler(array![[1.0], [3.0]].view(), ScalerKind::MinMax).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"kind\":\"minmax\""));
        assert_eq!(serde_json::from_str::<ScalerParams>(&json).unwrap(), p);
    }

    proptest! {
        #[test]
        fn standardized_columns_have_zero_mean_unit_variance(
            rows in proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, 4), 2..30)
        ) {
            let n = rows.len();
            let x = Array2::from_shape_vec((n, 4), rows.concat()).unwrap();
            let p = fit_scaler(x.view(), ScalerKind::Standard).unwrap();
            let z = p.apply(x.view()).unwrap();
            for (j, col) in z.columns().into_iter().enumerate() {
                let (_, sd) = p.column(j);
                if sd > 1e-9 {
                    let mean = col.sum() / n as f64;
                    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                    prop_assert!(mean.abs() < 1e-9);
                    prop_assert!((var - 1.0).abs() < 1e-9);
                }
            }
            for kind in [ScalerKind::Standard, ScalerKind::MinMax] {
                let p = fit_scaler(x.view(), kind).unwrap();
                let back = p.invert(p.apply(x.view()).unwrap().view()).unwrap();
                for ((a, b), j) in back.iter().zip(x.iter()).zip((0..n * 4).map(|i| i % 4)) {
                    if p.column(j).1 > 0.0 {
                        prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
                    }
                }
            }
        }
    }
}
