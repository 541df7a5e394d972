use std::f64::consts::PI;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Tonal-centroid basis: rows are the six coordinates (fifths, minor
/// thirds, major thirds as sin/cos pairs), columns the 12 pitch classes.
pub fn tonnetz_basis() -> Array2<f64> {
    const RADII: [f64; 3] = [1.0, 1.0, 0.5];
    const ANGLES: [f64; 3] = [7.0 * PI / 6.0, 3.0 * PI / 2.0, 2.0 * PI / 3.0];
    Array2::from_shape_fn((6, 12), |(row, l)| {
        let axis = row / 2;
        let theta = l as f64 * ANGLES[axis];
        let v = if row % 2 == 0 { theta.sin() } else { theta.cos() };
        RADII[axis] * v
    })
}

/// Project L1-normalised chroma frames onto the tonal-centroid axes.
pub fn tonnetz(chroma: &Array2<f64>) -> Result<Array2<f64>> {
    if chroma.nrows() != 12 {
        return Err(Error::DimensionMismatch {
            expected: 12,
            got: chroma.nrows(),
        });
    }
    if chroma.iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("chroma must be non-negative"));
    }
    let mut normalized = chroma.clone();
    for mut col in normalized.columns_mut() {
        let total: f64 = col.sum();
        if total > 0.0 {
            col.mapv_inplace(|v| v / total);
        }
    }
    Ok(tonnetz_basis().dot(&normalized))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_chroma_projects_to_origin() {
        let out = tonnetz(&Array2::zeros((12, 4))).unwrap();
        assert_eq!(out.dim(), (6, 4));
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_chroma_cancels() {
        // Brute-force the six sums over all pitch classes.
        let angles = [7.0 * PI / 6.0, 3.0 * PI / 2.0, 2.0 * PI / 3.0];
        for a in angles {
            let s: f64 = (0..12).map(|l| (l as f64 * a).sin()).sum();
            let c: f64 = (0..12).map(|l| (l as f64 * a).cos()).sum();
            assert!(s.abs() < 1e-12 && c.abs() < 1e-12);
        }
        let out = tonnetz(&Array2::from_elem((12, 2), 0.3)).unwrap();
        assert!(out.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn one_hot_c_gives_basis_column() {
        let mut chroma = Array2::zeros((12, 1));
        chroma[[0, 0]] = 0.8;
        let out = tonnetz(&chroma).unwrap();
        let expected = [0.0, 1.0, 0.0, 1.0, 0.0, 0.5];
        for (got, want) in out.column(0).iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_wrong_shape_or_negative() {
        assert!(tonnetz(&Array2::zeros((11, 1))).is_err());
        assert!(tonnetz(&Array2::from_elem((12, 1), -1.0)).is_err());
    }
}
