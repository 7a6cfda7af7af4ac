//! Gauss-Legendre rules on the unit interval and their tensor products.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Gauss1D {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Gauss1D {
    /// `n`-point rule on `[0, 1]`, exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Result<Self> {
        let (x, w): (&[f64], &[f64]) = match n {
            1 => (&[0.0], &[2.0]),
            2 => {
                const A: f64 = 0.577_350_269_189_625_8;
                (&[-A, A], &[1.0, 1.0])
            }
            3 => {
                const A: f64 = 0.774_596_669_241_483_4;
                (&[-A, 0.0, A], &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
            }
            4 => {
                const A: f64 = 0.339_981_043_584_856_3;
                const B: f64 = 0.861_136_311_594_052_6;
                const WA: f64 = 0.652_145_154_862_546_1;
                const WB: f64 = 0.347_854_845_137_453_9;
                (&[-B, -A, A, B], &[WB, WA, WA, WB])
            }
            5 => {
                const A: f64 = 0.538_469_310_105_683_1;
                const B: f64 = 0.906_179_845_938_664;
                const WA: f64 = 0.478_628_670_499_366_5;
                const WB: f64 = 0.236_926_885_056_189_1;
                (&[-B, -A, 0.0, A, B], &[WB, WA, 128.0 / 225.0, WA, WB])
            }
            _ => return Err(Error::Parameter(format!("no {n}-point Gauss rule"))),
        };
        Ok(Self {
            points: x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
            weights: w.iter().map(|w| 0.5 * w).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Tensor-product rule on `[0, 1]^2`; points run fastest in `xi`.
#[derive(Clone, Debug)]
pub struct QuadRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn gauss(n: usize) -> Result<Self> {
        let g = Gauss1D::new(n)?;
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&y, &wy) in g.points.iter().zip(&g.weights) {
            for (&x, &wx) in g.points.iter().zip(&g.weights) {
                points.push([x, y]);
                weights.push(wx * wy);
            }
        }
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
