//! Least-squares linear and quadratic surrogate models.

use nalgebra::{DMatrix, DVector};

const RANK_TOLERANCE: f64 = 1e-10;

/// Number of coefficients of a full quadratic in `d` variables.
pub fn quadratic_terms(dim: usize) -> usize {
    (dim + 1) * (dim + 2) / 2
}

/// Affine change of variables `y = (x - offset) / scale` improving the
/// conditioning of the design matrix.
#[derive(Debug, Clone)]
struct Frame {
    offset: Vec<f64>,
    scale: f64,
}

impl Frame {
    fn of(points: &[Vec<f64>]) -> Self {
        let dim = points[0].len();
        let n = points.len() as f64;
        let mut offset = vec![0.0; dim];
        for p in points {
            for (o, x) in offset.iter_mut().zip(p) {
                *o += x / n;
            }
        }
        let scale = points
            .iter()
            .flat_map(|p| p.iter().zip(&offset).map(|(x, o)| (x - o).abs()))
            .fold(0.0, f64::max);
        Self { offset, scale: if scale > 0.0 { scale } else { 1.0 } }
    }

    fn to_local(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.offset).map(|(xi, o)| (xi - o) / self.scale).collect()
    }

    fn to_global(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.offset).map(|(yi, o)| o + yi * self.scale).collect()
    }
}

fn least_squares(design: DMatrix<f64>, targets: DVector<f64>) -> Option<DVector<f64>> {
    let cols = design.ncols();
    if design.nrows() < cols {
        return None;
    }
    let svd = design.svd(true, true);
    let largest = svd.singular_values.max();
    if !(largest > 0.0) || svd.singular_values.min() <= RANK_TOLERANCE * largest {
        return None;
    }
    let coef = svd.solve(&targets, 0.0).ok()?;
    coef.iter().all(|c| c.is_finite()).then_some(coef)
}

/// `f(x) ~ value + gradient . x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub value: f64,
    pub gradient: Vec<f64>,
}

impl LinearModel {
    /// Least-squares fit; `None` if the points do not span the space.
    pub fn fit(points: &[Vec<f64>], losses: &[f64]) -> Option<Self> {
        let dim = points.first()?.len();
        let frame = Frame::of(points);
        let design = DMatrix::from_fn(points.len(), dim + 1, |r, c| {
            if c == 0 {
                1.0
            } else {
                frame.to_local(&points[r])[c - 1]
            }
        });
        let coef = least_squares(design, DVector::from_column_slice(losses))?;
        let gradient: Vec<f64> = coef.iter().skip(1).map(|g| g / frame.scale).collect();
        let value = coef[0] - gradient.iter().zip(&frame.offset).map(|(g, o)| g * o).sum::<f64>();
        Some(Self { value, gradient })
    }
}

/// `f(y) ~ constant + linear . y + y' quad y` with `y` in a local frame.
#[derive(Debug, Clone)]
pub struct QuadraticModel {
    frame: Frame,
    constant: f64,
    linear: DVector<f64>,
    quad: DMatrix<f64>,
}

impl QuadraticModel {
    /// Least-squares fit; `None` when fewer than [`quadratic_terms`] points or
    /// the design matrix is rank deficient.
    pub fn fit(points: &[Vec<f64>], losses: &[f64]) -> Option<Self> {
        let dim = points.first()?.len();
        let terms = quadratic_terms(dim);
        if points.len() < terms {
            return None;
        }
        let frame = Frame::of(points);
        let mut design = DMatrix::zeros(points.len(), terms);
        for (r, p) in points.iter().enumerate() {
            let y = frame.to_local(p);
            design[(r, 0)] = 1.0;
            let mut c = 1;
            for i in 0..dim {
                design[(r, c)] = y[i];
                c += 1;
            }
            for i in 0..dim {
                for j in i..dim {
                    design[(r, c)] = y[i] * y[j];
                    c += 1;
                }
            }
        }
        let coef = least_squares(design, DVector::from_column_slice(losses))?;
        let linear = DVector::from_iterator(dim, coef.iter().skip(1).take(dim).copied());
        let mut quad = DMatrix::zeros(dim, dim);
        let mut c = 1 + dim;
        for i in 0..dim {
            for j in i..dim {
                if i == j {
                    quad[(i, i)] = coef[c];
                } else {
                    quad[(i, j)] = coef[c] / 2.0;
                    quad[(j, i)] = coef[c] / 2.0;
                }
                c += 1;
            }
        }
        Some(Self { frame, constant: coef[0], linear, quad })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let y = DVector::from_vec(self.frame.to_local(x));
        self.constant + self.linear.dot(&y) + y.dot(&(&self.quad * &y))
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let y = DVector::from_vec(self.frame.to_local(x));
        let g = (&self.linear + 2.0 * &self.quad * y) / self.frame.scale;
        g.iter().copied().collect()
    }

    pub fn hessian(&self) -> DMatrix<f64> {
        2.0 * &self.quad / (self.frame.scale * self.frame.scale)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.quad.clone().cholesky().is_some()
    }

    /// Stationary point of a positive-definite model.
    pub fn minimizer(&self) -> Option<Vec<f64>> {
        let chol = self.quad.clone().cholesky()?;
        let y = chol.solve(&(-0.5 * &self.linear));
        let x = self.frame.to_global(y.as_slice());
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_one_dimensional_parabola() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0]];
        let m = QuadraticModel::fit(&pts, &[9.0, 4.0, 1.0]).unwrap();
        assert!((m.minimizer().unwrap()[0] - 3.0).abs() < 1e-12);
        assert!((m.value(&[5.0]) - 4.0).abs() < 1e-10);
        assert!((m.gradient(&[5.0])[0] - 4.0).abs() < 1e-10);
        assert!((m.hessian()[(0, 0)] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn linear_fit_recovers_plane() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![2.0, 3.0]];
        let f = |p: &[f64]| 1.0 + 2.0 * p[0] - 3.0 * p[1];
        let losses: Vec<f64> = pts.iter().map(|p| f(p)).collect();
        let m = LinearModel::fit(&pts, &losses).unwrap();
        assert!((m.value - 1.0).abs() < 1e-12);
        assert!((m.gradient[0] - 2.0).abs() < 1e-12);
        assert!((m.gradient[1] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_points_are_rejected() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(LinearModel::fit(&pts, &[0.0, 1.0, 2.0]).is_none());
    }

    #[test]
    fn saddle_is_not_positive_definite() {
        let pts: Vec<Vec<f64>> = [(0., 0.), (1., 0.), (0., 1.), (-1., 0.), (0., -1.), (1., 1.), (-1., 1.)]
            .iter()
            .map(|&(a, b)| vec![a, b])
            .collect();
        let losses: Vec<f64> = pts.iter().map(|p| p[0] * p[0] - p[1] * p[1]).collect();
        let m = QuadraticModel::fit(&pts, &losses).unwrap();
        assert!(!m.is_positive_definite());
        assert!(m.minimizer().is_none());
    }
}
