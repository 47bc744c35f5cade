//! Duhamel convolution `V(t) = T(t) F0 + int_0^t T(t - s) F1(s) ds` on a
//! uniform time mesh.
//!
//! The mesh splits `[0, t_end]` into equal cells carrying `order` interior
//! Gauss-Legendre nodes each. Sources are sampled at those nodes and
//! interpolated by the degree `order - 1` Lagrange polynomial on every cell;
//! the convolution of that polynomial against the exact modal kernel is
//! integrated with a per-mode Gauss rule whose length grows with the mode
//! frequency. Between cells the state is carried by the exact propagator.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::semigroup::{propagate_unchecked, ModePropagator};
use crate::spectral::{ModalVector, PhysicalParams, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeMesh {
    t_end: f64,
    cells: usize,
    /// Gauss nodes as offsets in `[0, dt]`.
    offsets: Vec<f64>,
}

impl TimeMesh {
    pub fn new(t_end: f64, cells: usize, order: usize) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t_end",
                value: t_end,
                reason: "time horizon must be positive and finite",
            });
        }
        if cells == 0 {
            return Err(Error::argument("time mesh needs at least one cell"));
        }
        if order == 0 || order > 16 {
            return Err(Error::argument("time quadrature order must be in 1..=16"));
        }
        let dt = t_end / cells as f64;
        let (x, _) = gauss_legendre(order);
        let offsets = x.iter().map(|x| 0.5 * dt * (x + 1.0)).collect();
        Ok(TimeMesh {
            t_end,
            cells,
            offsets,
        })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn order(&self) -> usize {
        self.offsets.len()
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.cells as f64
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Cell boundaries `t_0 = 0, ..., t_cells = t_end`.
    pub fn endpoints(&self) -> Vec<f64> {
        (0..=self.cells).map(|j| self.endpoint(j)).collect()
    }

    pub fn endpoint(&self, j: usize) -> f64 {
        if j == self.cells {
            self.t_end
        } else {
            j as f64 * self.dt()
        }
    }

    pub fn node_count(&self) -> usize {
        self.cells * self.order()
    }

    /// All interior nodes, cell by cell.
    pub fn node_times(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.node_count());
        for j in 0..self.cells {
            let t0 = self.endpoint(j);
            out.extend(self.offsets.iter().map(|s| t0 + s));
        }
        out
    }

    /// Cell containing `t`, preferring the left cell at interior boundaries.
    pub fn cell_of(&self, t: f64) -> usize {
        if t <= 0.0 {
            return 0;
        }
        let j = libm::ceil(t / self.dt()) as usize;
        j.clamp(1, self.cells) - 1
    }

    /// Lagrange basis on the cell nodes evaluated at offset `tau`.
    pub fn interpolation_weights(&self, tau: f64) -> Vec<f64> {
        lagrange_weights(&self.offsets, tau)
    }

    /// Same mesh with the number of cells multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.t_end, self.cells * factor, self.order())
    }
}

fn lagrange_weights(nodes: &[f64], tau: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|m| {
            let mut w = 1.0;
            for (l, &s) in nodes.iter().enumerate() {
                if l != m {
                    w *= (tau - s) / (nodes[m] - s);
                }
            }
            w
        })
        .collect()
}

/// Mode-wise convolution weights: `u += uu f_u + uv f_v`,
/// `v += vu f_u + vv f_v` for a unit sample at one source node.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Weight {
    uu: f64,
    uv: f64,
    vu: f64,
    vv: f64,
}

/// Convolution of the kernel `M(tau - sigma)` against the Lagrange basis over
/// `sigma in [0, tau]`.
fn convolution_weights(
    n: usize,
    tau: f64,
    offsets: &[f64],
    params: &PhysicalParams,
    sub_order: usize,
) -> Vec<Weight> {
    let mut out = alloc::vec![Weight::default(); offsets.len()];
    if tau <= 0.0 {
        return out;
    }
    let (x, w) = gauss_legendre(sub_order);
    for (xi, wi) in x.iter().zip(&w) {
        let sigma = 0.5 * tau * (xi + 1.0);
        let scale = 0.5 * tau * wi;
        let k = propagate_unchecked(n, tau - sigma, params);
        for (m, l) in lagrange_weights(offsets, sigma).into_iter().enumerate() {
            let s = scale * l;
            out[m].uu += s * k.m11;
            out[m].uv += s * k.m12;
            out[m].vu += s * k.m21;
            out[m].vv += s * k.m22;
        }
    }
    out
}

fn sub_order_for(n: usize, dt: f64, order: usize, params: &PhysicalParams) -> usize {
    let rate = libm::sqrt(params.stiffness(n)).max(params.nu());
    2 * order + 4 + libm::ceil(rate * dt) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct DuhamelSolution {
    /// `V(t_j)` at the cell boundaries.
    pub endpoints: Vec<StateVector>,
    /// `V` at the interior nodes, cell by cell.
    pub nodes: Vec<StateVector>,
}

impl DuhamelSolution {
    pub fn displacement_at_nodes(&self) -> Vec<ModalVector> {
        self.nodes.iter().map(|s| s.u.clone()).collect()
    }
}

/// Precomputed propagators and convolution weights for one mesh, parameter
/// set and capacity.
#[derive(Debug, Clone)]
pub struct DuhamelPlan {
    params: PhysicalParams,
    mesh: TimeMesh,
    capacity: usize,
    /// `M(dt)` per mode.
    step: Vec<ModePropagator>,
    /// `M(offset_i)` per mode and node.
    to_node: Vec<Vec<ModePropagator>>,
    /// Convolution into node `i` (`i = order` is the cell end), per mode.
    weights: Vec<Vec<Vec<Weight>>>,
}

impl DuhamelPlan {
    pub fn new(params: PhysicalParams, mesh: TimeMesh, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::argument("capacity must be positive"));
        }
        let dt = mesh.dt();
        let order = mesh.order();
        let mut step = Vec::with_capacity(capacity);
        let mut to_node = Vec::with_capacity(capacity);
        let mut weights = Vec::with_capacity(capacity);
        for n in 1..=capacity {
            step.push(propagate_unchecked(n, dt, &params));
            to_node.push(
                mesh.offsets()
                    .iter()
                    .map(|&s| propagate_unchecked(n, s, &params))
                    .collect(),
            );
            let sub = sub_order_for(n, dt, order, &params);
            let mut per_target: Vec<Vec<Weight>> = mesh
                .offsets()
                .iter()
                .map(|&s| convolution_weights(n, s, mesh.offsets(), &params, sub))
                .collect();
            per_target.push(convolution_weights(n, dt, mesh.offsets(), &params, sub));
            weights.push(per_target);
        }
        Ok(DuhamelPlan {
            params,
            mesh,
            capacity,
            step,
            to_node,
            weights,
        })
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    fn check_source_len(&self, len: usize) -> Result<()> {
        if len != self.mesh.node_count() {
            return Err(Error::argument(format!(
                "source has {len} samples, mesh has {} nodes",
                self.mesh.node_count()
            )));
        }
        Ok(())
    }

    fn check_cap(&self, cap: usize) -> Result<()> {
        if cap != self.capacity {
            return Err(Error::CapacityMismatch {
                left: cap,
                right: self.capacity,
            });
        }
        Ok(())
    }

    /// Full `F1 = (f_u, f_v)` source sampled at the mesh nodes.
    pub fn integrate(
        &self,
        source: &[StateVector],
        initial: Option<&StateVector>,
    ) -> Result<DuhamelSolution> {
        self.check_source_len(source.len())?;
        for s in source {
            self.check_cap(s.u.capacity())?;
            self.check_cap(s.v.capacity())?;
        }
        self.run(|node, k| (source[node].u.coeff(k), source[node].v.coeff(k)), initial)
    }

    /// `F1 = (0, f)`, the form used by the fixed-point map.
    pub fn integrate_velocity(
        &self,
        source: &[ModalVector],
        initial: Option<&StateVector>,
    ) -> Result<DuhamelSolution> {
        self.check_source_len(source.len())?;
        for s in source {
            self.check_cap(s.capacity())?;
        }
        self.run(|node, k| (0.0, source[node].coeff(k)), initial)
    }

    fn run(
        &self,
        sample: impl Fn(usize, usize) -> (f64, f64),
        initial: Option<&StateVector>,
    ) -> Result<DuhamelSolution> {
        let cap = self.capacity;
        let order = self.mesh.order();
        let cells = self.mesh.cells();
        let mut start = match initial {
            Some(s) => {
                self.check_cap(s.capacity())?;
                s.clone()
            }
            None => StateVector::zeros(cap),
        };
        let mut endpoints = Vec::with_capacity(cells + 1);
        let mut nodes = Vec::with_capacity(cells * order);
        endpoints.push(start.clone());
        let mut src = alloc::vec![(0.0, 0.0); order];
        for j in 0..cells {
            let mut cell_nodes = alloc::vec![StateVector::zeros(cap); order];
            let mut end = StateVector::zeros(cap);
            for k in 1..=cap {
                let a0 = start.u.coeff(k);
                let b0 = start.v.coeff(k);
                let mut any_src = false;
                for (m, slot) in src.iter_mut().enumerate() {
                    *slot = sample(j * order + m, k);
                    any_src |= slot.0 != 0.0 || slot.1 != 0.0;
                }
                if a0 == 0.0 && b0 == 0.0 && !any_src {
                    continue;
                }
                let w = &self.weights[k - 1];
                for i in 0..=order {
                    let (mut a, mut b) = if i < order {
                        self.to_node[k - 1][i].apply(a0, b0)
                    } else {
                        self.step[k - 1].apply(a0, b0)
                    };
                    if any_src {
                        for (wm, &(fu, fv)) in w[i].iter().zip(&src) {
                            a += wm.uu * fu + wm.uv * fv;
                            b += wm.vu * fu + wm.vv * fv;
                        }
                    }
                    let target = if i < order { &mut cell_nodes[i] } else { &mut end };
                    target.u.coeffs_mut()[k - 1] = a;
                    target.v.coeffs_mut()[k - 1] = b;
                }
            }
            nodes.extend(cell_nodes);
            endpoints.push(end.clone());
            start = end;
        }
        Ok(DuhamelSolution { endpoints, nodes })
    }

    /// `V(t)` at an arbitrary `t in [0, t_end]`, propagated exactly from the
    /// left cell boundary with the cell's source interpolant.
    pub fn state_at(
        &self,
        solution: &DuhamelSolution,
        source: &[StateVector],
        t: f64,
    ) -> Result<StateVector> {
        self.check_source_len(source.len())?;
        if !(t >= 0.0) || t > self.mesh.t_end() * (1.0 + 1e-14) {
            return Err(Error::argument(format!("t = {t} outside the mesh")));
        }
        let order = self.mesh.order();
        let j = self.mesh.cell_of(t);
        let tau = (t - self.mesh.endpoint(j)).max(0.0);
        let start = &solution.endpoints[j];
        let mut out = StateVector::zeros(self.capacity);
        for k in 1..=self.capacity {
            let (mut a, mut b) =
                propagate_unchecked(k, tau, &self.params).apply(start.u.coeff(k), start.v.coeff(k));
            let sub = sub_order_for(k, self.mesh.dt(), order, &self.params);
            let w = convolution_weights(k, tau, self.mesh.offsets(), &self.params, sub);
            for (m, wm) in w.iter().enumerate() {
                let s = &source[j * order + m];
                let (fu, fv) = (s.u.coeff(k), s.v.coeff(k));
                a += wm.uu * fu + wm.uv * fv;
                b += wm.vu * fu + wm.vv * fv;
            }
            out.u.coeffs_mut()[k - 1] = a;
            out.v.coeffs_mut()[k - 1] = b;
        }
        Ok(out)
    }
}

/// Samples `source` at the mesh nodes and integrates with `F0 = 0`.
pub fn duhamel(
    source: impl Fn(f64) -> StateVector,
    mesh: &TimeMesh,
    params: &PhysicalParams,
    capacity: usize,
) -> Result<DuhamelSolution> {
    let plan = DuhamelPlan::new(*params, mesh.clone(), capacity)?;
    let samples: Vec<StateVector> = mesh.node_times().into_iter().map(source).collect();
    plan.integrate(&samples, None)
}

/// Interpolates node samples of a time-dependent modal vector to an arbitrary
/// time using the Lagrange polynomial of the containing cell.
pub fn interpolate_nodes(mesh: &TimeMesh, samples: &[ModalVector], t: f64) -> Result<ModalVector> {
    if samples.len() != mesh.node_count() {
        return Err(Error::argument("sample count does not match mesh nodes"));
    }
    let j = mesh.cell_of(t);
    let tau = t - mesh.endpoint(j);
    let order = mesh.order();
    let cap = samples[0].capacity();
    let mut out = ModalVector::zeros(cap);
    for (m, l) in mesh.interpolation_weights(tau).into_iter().enumerate() {
        let s = &samples[j * order + m];
        for (o, a) in out.coeffs_mut().iter_mut().zip(s.coeffs()) {
            *o += l * a;
        }
    }
    Ok(out)
}
