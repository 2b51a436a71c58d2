use super::flow::rel_vector_field;
use super::integrate::TrajectoryRecord;
use super::system::HamiltonianSystem;
use crate::error::{Error, Result};

/// Coordinate-time length of the first full turn of the velocity projected on
/// the plane of axes `(a, b)`.
pub fn revolution_period(sys: &HamiltonianSystem, record: &TrajectoryRecord, axes: (usize, usize)) -> Result<f64> {
    let (a, b) = axes;
    let n = sys.config_dim();
    if a == 0 || b == 0 || a >= n || b >= n || a == b {
        return Err(Error::dims(format!("invalid transverse axes {axes:?}")));
    }
    let fields = record.states.iter().map(|z| rel_vector_field(sys, z)).collect::<Result<Vec<_>>>()?;
    let mut theta = Vec::with_capacity(fields.len());
    for f in &fields {
        let raw = f.dq[b].atan2(f.dq[a]);
        let unwrapped = match theta.last() {
            None => raw,
            Some(&prev) => prev + wrap(raw - wrap(prev)),
        };
        theta.push(unwrapped);
    }
    let turned = |i: usize| (theta[i] - theta[0]).abs();
    let i = (1..theta.len())
        .find(|&i| turned(i) >= 2.0 * std::f64::consts::PI)
        .ok_or_else(|| Error::InsufficientRunLength("trajectory does not complete a revolution".into()))?;
    let target = 2.0 * std::f64::consts::PI;
    let frac = (target - turned(i - 1)) / (turned(i) - turned(i - 1));
    let (s0, s1) = (record.parameter[i - 1], record.parameter[i]);
    let (x0, x1) = (record.states[i - 1].q[0], record.states[i].q[0]);
    let (d0, d1) = (fields[i - 1].dq[0], fields[i].dq[0]);
    let t_end = hermite(frac, s1 - s0, (x0, d0), (x1, d1));
    Ok(t_end - record.states[0].q[0])
}

fn wrap(x: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    x - tau * (x / tau).round()
}

/// Cubic Hermite interpolation on an interval of length `h` at fraction `t`.
fn hermite(t: f64, h: f64, (y0, d0): (f64, f64), (y1, d1): (f64, f64)) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * h * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * h * d1
}
