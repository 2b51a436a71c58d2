use crate::error::{Error, Result};

/// A point `(q^u, p_u)` of the cotangent bundle. Index 0 is the time-like
/// coordinate and `p[0]` its conjugate momentum.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct PhasePoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.is_empty() || q.len() != p.len() {
            return Err(Error::dims(format!("phase point with |q| = {}, |p| = {}", q.len(), p.len())));
        }
        if q.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("phase point".into()));
        }
        Ok(PhasePoint { q, p })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Projection onto the vertical cotangent bundle: forgets `p_0`.
    pub fn zeta(&self) -> VerticalPhasePoint {
        VerticalPhasePoint { t: self.q[0], q: self.q[1..].to_vec(), p: self.p[1..].to_vec() }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.q.clone();
        v.extend_from_slice(&self.p);
        v
    }

    pub(crate) fn from_flat(z: &[f64]) -> Self {
        let n = z.len() / 2;
        PhasePoint { q: z[..n].to_vec(), p: z[n..].to_vec() }
    }
}

/// A point `(t, q^k, p_k)` of the vertical cotangent bundle.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct VerticalPhasePoint {
    pub t: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl VerticalPhasePoint {
    pub fn new(t: f64, q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::dims(format!("vertical point with |q| = {}, |p| = {}", q.len(), p.len())));
        }
        if !t.is_finite() || q.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vertical phase point".into()));
        }
        Ok(VerticalPhasePoint { t, q, p })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Configuration coordinates `(t, q^1..q^m)`.
    pub fn config(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.q.len() + 1);
        x.push(self.t);
        x.extend_from_slice(&self.q);
        x
    }

    /// The point of `T*Q` over this one with the given `p_0`.
    pub fn lift(&self, p0: f64) -> PhasePoint {
        let mut p = Vec::with_capacity(self.p.len() + 1);
        p.push(p0);
        p.extend_from_slice(&self.p);
        PhasePoint { q: self.config(), p }
    }
}
