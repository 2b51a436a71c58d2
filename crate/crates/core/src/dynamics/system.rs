use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::phase_space::{MetricField, Observable, PhasePoint, VerticalPhasePoint};
use crate::poly::Polynomial;

pub type PotentialFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type PotentialJacobianFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Electromagnetic potential `A_u(q)` with optional Jacobian `J[(u, l)] = d_l A_u`.
#[derive(Clone)]
pub struct GaugePotential {
    dim: usize,
    value: PotentialFn,
    jacobian: Option<PotentialJacobianFn>,
    fd_step: f64,
}

impl std::fmt::Debug for GaugePotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GaugePotential")
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl GaugePotential {
    pub fn new<F>(dim: usize, value: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        GaugePotential { dim, value: Arc::new(value), jacobian: None, fd_step: 1e-6 }
    }

    pub fn with_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    /// `A = (0, -B y / 2, B x / 2, 0, ..)`: uniform magnetic field `B` along the
    /// third spatial axis, in the plane of axes 1 and 2.
    pub fn uniform_magnetic(dim: usize, b: f64) -> Self {
        assert!(dim >= 3, "a transverse plane needs two spatial axes");
        GaugePotential::new(dim, move |q| {
            let mut a = vec![0.0; dim];
            a[1] = -0.5 * b * q[2];
            a[2] = 0.5 * b * q[1];
            a
        })
        .with_jacobian(move |_| {
            let mut j = DMatrix::zeros(dim, dim);
            j[(1, 2)] = -0.5 * b;
            j[(2, 1)] = 0.5 * b;
            j
        })
    }

    /// `A = (-E x, 0, ..)`: uniform electric field `E` along axis 1.
    pub fn uniform_electric(dim: usize, e: f64) -> Self {
        GaugePotential::new(dim, move |q| {
            let mut a = vec![0.0; dim];
            a[0] = -e * q[1];
            a
        })
        .with_jacobian(move |_| {
            let mut j = DMatrix::zeros(dim, dim);
            j[(0, 1)] = -e;
            j
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn value(&self, q: &[f64]) -> Vec<f64> {
        (self.value)(q)
    }

    pub fn jacobian(&self, q: &[f64]) -> DMatrix<f64> {
        if let Some(j) = &self.jacobian {
            return j(q);
        }
        let mut jac = DMatrix::zeros(self.dim, self.dim);
        let mut qs = q.to_vec();
        for l in 0..self.dim {
            let h = self.fd_step * q[l].abs().max(1.0);
            qs[l] = q[l] + h;
            let ap = self.value(&qs);
            qs[l] = q[l] - h;
            let am = self.value(&qs);
            qs[l] = q[l];
            for u in 0..self.dim {
                jac[(u, l)] = (ap[u] - am[u]) / (2.0 * h);
            }
        }
        jac
    }

    /// `d_k J` by central differences of the Jacobian.
    fn jacobian_derivative(&self, q: &[f64]) -> Vec<DMatrix<f64>> {
        let mut qs = q.to_vec();
        (0..self.dim)
            .map(|k| {
                let h = 1e-4 * q[k].abs().max(1.0);
                qs[k] = q[k] + h;
                let jp = self.jacobian(&qs);
                qs[k] = q[k] - h;
                let jm = self.jacobian(&qs);
                qs[k] = q[k];
                (jp - jm) / (2.0 * h)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub enum HamiltonianSystem {
    /// `H(t, q^k, p_k)` on the vertical cotangent bundle.
    NonRelativistic { hamiltonian: Observable },
    /// `H(q^u, p_u)` on the cotangent bundle together with the metric of the
    /// velocity hyperboloid.
    Relativistic { hamiltonian: Observable, metric: MetricField },
}

impl HamiltonianSystem {
    pub fn non_relativistic(hamiltonian: Observable) -> Result<Self> {
        if hamiltonian.config_dim() != hamiltonian.momentum_dim() + 1 {
            return Err(Error::dims("non-relativistic Hamiltonian must live on the vertical cotangent bundle"));
        }
        Ok(HamiltonianSystem::NonRelativistic { hamiltonian })
    }

    pub fn relativistic(hamiltonian: Observable, metric: MetricField) -> Result<Self> {
        if hamiltonian.config_dim() != hamiltonian.momentum_dim() {
            return Err(Error::dims("relativistic Hamiltonian must live on the cotangent bundle"));
        }
        if metric.dim() != hamiltonian.config_dim() {
            return Err(Error::dims("metric and Hamiltonian dimensions differ"));
        }
        Ok(HamiltonianSystem::Relativistic { hamiltonian, metric })
    }

    /// Free mass in Minkowski space: `H = -(1/2m) eta^{uv} p_u p_v`.
    pub fn free_special(dim: usize, mass: f64) -> Result<Self> {
        check_mass(mass)?;
        let mut h = Polynomial::zero(2 * dim);
        for u in 0..dim {
            let mut e = vec![0; 2 * dim];
            e[dim + u] = 2;
            let sign = if u == 0 { 1.0 } else { -1.0 };
            h.add_term(e, -sign / (2.0 * mass));
        }
        HamiltonianSystem::relativistic(Observable::polynomial(dim, dim, h)?, MetricField::minkowski(dim))
    }

    /// Charge `e` in Minkowski space: `H = -(1/2m) eta^{uv} (p - eA)_u (p - eA)_v`.
    pub fn charged_em(mass: f64, charge: f64, potential: GaugePotential) -> Result<Self> {
        check_mass(mass)?;
        let dim = potential.dim();
        let eta = DVector::from_fn(dim, |u, _| if u == 0 { 1.0 } else { -1.0 });
        let kinetic = {
            let potential = potential.clone();
            move |q: &[f64], p: &[f64]| -> Vec<f64> {
                let a = potential.value(q);
                p.iter().zip(&a).map(|(p, a)| p - charge * a).collect()
            }
        };
        let value = {
            let (kinetic, eta) = (kinetic.clone(), eta.clone());
            move |q: &[f64], p: &[f64]| {
                let pi = kinetic(q, p);
                -(0..dim).map(|u| eta[u] * pi[u] * pi[u]).sum::<f64>() / (2.0 * mass)
            }
        };
        let gradient = {
            let (kinetic, eta, potential) = (kinetic.clone(), eta.clone(), potential.clone());
            move |q: &[f64], p: &[f64]| {
                let pi = kinetic(q, p);
                let j = potential.jacobian(q);
                let dp: Vec<f64> = (0..dim).map(|u| -eta[u] * pi[u] / mass).collect();
                let dq: Vec<f64> = (0..dim)
                    .map(|l| (charge / mass) * (0..dim).map(|u| eta[u] * j[(u, l)] * pi[u]).sum::<f64>())
                    .collect();
                (dq, dp)
            }
        };
        let hessian = move |q: &[f64], p: &[f64]| {
            let pi = kinetic(q, p);
            let j = potential.jacobian(q);
            let dj = potential.jacobian_derivative(q);
            let mut h = DMatrix::zeros(2 * dim, 2 * dim);
            for l in 0..dim {
                for k in 0..dim {
                    h[(l, k)] = (charge / mass)
                        * (0..dim)
                            .map(|u| eta[u] * (dj[k][(u, l)] * pi[u] - charge * j[(u, l)] * j[(u, k)]))
                            .sum::<f64>();
                }
                for u in 0..dim {
                    let mixed = charge / mass * eta[u] * j[(u, l)];
                    h[(l, dim + u)] = mixed;
                    h[(dim + u, l)] = mixed;
                }
                h[(dim + l, dim + l)] = -eta[l] / mass;
            }
            h
        };
        let obs = Observable::from_fn_with_gradient(dim, dim, value, gradient)?.with_hessian(hessian);
        HamiltonianSystem::relativistic(obs, MetricField::minkowski(dim))
    }

    /// Mass in a gravitational field: `H = -(1/2m) g^{uv}(q) p_u p_v`.
    pub fn curved_metric(mass: f64, metric: MetricField) -> Result<Self> {
        check_mass(mass)?;
        let dim = metric.dim();
        let value = {
            let g = metric.clone();
            move |q: &[f64], p: &[f64]| {
                let p = DVector::from_column_slice(p);
                -(p.transpose() * g.inverse_at(q) * &p)[(0, 0)] / (2.0 * mass)
            }
        };
        let gradient = {
            let g = metric.clone();
            move |q: &[f64], p: &[f64]| {
                let pv = DVector::from_column_slice(p);
                let dp = -(g.inverse_at(q) * &pv) / mass;
                let dq = g
                    .inverse_derivative(q)
                    .iter()
                    .map(|d| -(pv.transpose() * d * &pv)[(0, 0)] / (2.0 * mass))
                    .collect();
                (dq, dp.iter().copied().collect())
            }
        };
        let obs = Observable::from_fn_with_gradient(dim, dim, value, gradient)?;
        HamiltonianSystem::relativistic(obs, metric)
    }

    /// `H = (p^2 + w^2 q^2) / 2` in `dim` spatial dimensions.
    pub fn nonrel_oscillator(dim: usize, omega: f64) -> Result<Self> {
        let nv = 2 * dim + 1;
        let mut h = Polynomial::zero(nv);
        for k in 0..dim {
            let mut e = vec![0; nv];
            e[1 + k] = 2;
            h.add_term(e, 0.5 * omega * omega);
            let mut e = vec![0; nv];
            e[dim + 1 + k] = 2;
            h.add_term(e, 0.5);
        }
        HamiltonianSystem::non_relativistic(Observable::polynomial(dim + 1, dim, h)?)
    }

    /// `H = p^2 / 2m`.
    pub fn nonrel_free(dim: usize, mass: f64) -> Result<Self> {
        check_mass(mass)?;
        let nv = 2 * dim + 1;
        let mut h = Polynomial::zero(nv);
        for k in 0..dim {
            let mut e = vec![0; nv];
            e[dim + 1 + k] = 2;
            h.add_term(e, 0.5 / mass);
        }
        HamiltonianSystem::non_relativistic(Observable::polynomial(dim + 1, dim, h)?)
    }

    pub fn hamiltonian(&self) -> &Observable {
        match self {
            HamiltonianSystem::NonRelativistic { hamiltonian }
            | HamiltonianSystem::Relativistic { hamiltonian, .. } => hamiltonian,
        }
    }

    pub fn is_relativistic(&self) -> bool {
        matches!(self, HamiltonianSystem::Relativistic { .. })
    }

    /// Dimension of `Q`, including time.
    pub fn config_dim(&self) -> usize {
        match self {
            HamiltonianSystem::NonRelativistic { hamiltonian } => hamiltonian.config_dim(),
            HamiltonianSystem::Relativistic { hamiltonian, .. } => hamiltonian.config_dim(),
        }
    }

    /// Lifts a vertical state onto the constraint surface `p_0 = -H`.
    pub fn lift_on_shell(&self, s: &VerticalPhasePoint) -> Result<PhasePoint> {
        match self {
            HamiltonianSystem::NonRelativistic { hamiltonian } => Ok(s.lift(-hamiltonian.at_vertical(s)?)),
            HamiltonianSystem::Relativistic { .. } => {
                Err(Error::dims("on-shell lift is defined for non-relativistic systems"))
            }
        }
    }
}

fn check_mass(mass: f64) -> Result<()> {
    if mass > 0.0 && mass.is_finite() {
        Ok(())
    } else {
        Err(Error::config("mass", format!("must be positive, got {mass}")))
    }
}
