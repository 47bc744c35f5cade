//! Gauss-Legendre quadrature on (-1, 1) and the sine-basis transforms built
//! on top of it.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::ModalVector;

/// Products `phi_j phi_k` with `j, k <= 2 * capacity` must integrate to this
/// accuracy on a freshly built grid.
pub const GRAM_TOLERANCE: f64 = 1e-12;

/// Fixed extra nodes on top of the oscillation count.
pub const ORDER_GUARD: usize = 16;

/// Nodes and weights of the `order`-point Gauss-Legendre rule on `[-1, 1]`,
/// nodes increasing.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if libm::fabs(dx) <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Minimal Gauss-Legendre order that resolves products of sine modes up to
/// index `2 * capacity` (frequencies up to `4 pi capacity`).
pub fn default_order(capacity: usize) -> usize {
    order_for_frequency(4.0 * PI * capacity as f64)
}

/// Gauss-Legendre resolves `exp(i K x)` on `[-1, 1]` once the order passes
/// `K / 2` by a margin growing like `K^(1/3)`.
fn order_for_frequency(freq: f64) -> usize {
    libm::ceil(freq / 2.0 + 4.0 * libm::cbrt(freq)) as usize + ORDER_GUARD
}

/// Order needed to integrate `u^p phi_k` exactly to roundoff when `u` carries
/// `capacity` modes: frequencies reach `(p + 1) pi capacity`.
pub fn dealiased_order(capacity: usize, power: u32) -> usize {
    let freq = (power as f64 + 1.0) * PI * capacity as f64;
    order_for_frequency(freq).max(default_order(capacity))
}

/// Gauss-Legendre grid paired with a tabulated sine basis of a fixed
/// capacity.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    capacity: usize,
    /// `sines[(k - 1) * order + i] = sin(k pi x_i)`.
    sines: Vec<f64>,
}

impl QuadratureGrid {
    /// Grid with the default order for `capacity`.
    pub fn new(capacity: usize) -> Result<Self> {
        Self::with_order(capacity, default_order(capacity))
    }

    /// Builds the rule and verifies the Gram matrix of `phi_1 .. phi_{2M}`.
    pub fn with_order(capacity: usize, order: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::argument("capacity must be positive"));
        }
        if order < 2 {
            return Err(Error::argument("quadrature order must be at least 2"));
        }
        let (nodes, weights) = gauss_legendre(order);
        let grid = Self::assemble(capacity, nodes, weights);
        let worst = grid.gram_defect(2 * capacity);
        if !(worst <= GRAM_TOLERANCE) {
            return Err(Error::Configuration(format!(
                "quadrature order {order} integrates sine products up to index {} with error {worst:e} > {GRAM_TOLERANCE:e}",
                2 * capacity
            )));
        }
        Ok(grid)
    }

    fn assemble(capacity: usize, nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        let order = nodes.len();
        let mut sines = alloc::vec![0.0; capacity * order];
        for (i, &x) in nodes.iter().enumerate() {
            let theta = PI * x;
            for k in 1..=capacity {
                sines[(k - 1) * order + i] = libm::sin(k as f64 * theta);
            }
        }
        QuadratureGrid {
            nodes,
            weights,
            capacity,
            sines,
        }
    }

    /// Largest entry of `|G - I|` for the Gram matrix of the first `modes`
    /// sine functions under this rule.
    pub fn gram_defect(&self, modes: usize) -> f64 {
        let order = self.order();
        let mut table = alloc::vec![0.0; modes * order];
        for (i, &x) in self.nodes.iter().enumerate() {
            for k in 1..=modes {
                table[(k - 1) * order + i] = libm::sin(k as f64 * PI * x);
            }
        }
        let mut worst: f64 = 0.0;
        for j in 0..modes {
            let rj = &table[j * order..(j + 1) * order];
            for k in j..modes {
                let rk = &table[k * order..(k + 1) * order];
                let mut s = 0.0;
                for i in 0..order {
                    s += self.weights[i] * rj[i] * rk[i];
                }
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max(libm::fabs(s - target));
            }
        }
        worst
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    fn sine_row(&self, k: usize) -> &[f64] {
        let order = self.order();
        &self.sines[(k - 1) * order..k * order]
    }

    /// Values of `u` at the quadrature nodes.
    pub fn synthesize(&self, u: &ModalVector) -> Result<Vec<f64>> {
        if u.capacity() > self.capacity {
            return Err(Error::CapacityMismatch {
                left: u.capacity(),
                right: self.capacity,
            });
        }
        let mut values = alloc::vec![0.0; self.order()];
        for (k, &a) in u.active().iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (val, s) in values.iter_mut().zip(self.sine_row(k + 1)) {
                *val += a * s;
            }
        }
        Ok(values)
    }

    /// `L2` inner products `(f, phi_k)` for `k = 1 ..= capacity` from nodal
    /// values of `f`.
    pub fn analyze(&self, values: &[f64], capacity: usize) -> Result<ModalVector> {
        if values.len() != self.order() {
            return Err(Error::argument(format!(
                "expected {} nodal values, got {}",
                self.order(),
                values.len()
            )));
        }
        if capacity > self.capacity {
            return Err(Error::Capacity {
                requested: capacity,
                capacity: self.capacity,
            });
        }
        let weighted: Vec<f64> = values
            .iter()
            .zip(&self.weights)
            .map(|(f, w)| f * w)
            .collect();
        let coeffs = (1..=capacity)
            .map(|k| {
                weighted
                    .iter()
                    .zip(self.sine_row(k))
                    .fold(0.0, |acc, (f, s)| acc + f * s)
            })
            .collect();
        Ok(ModalVector::from_coeffs(coeffs))
    }

    /// `int_{-1}^{1} f` from nodal values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(&self.weights)
            .fold(0.0, |acc, (f, w)| acc + f * w)
    }
}
