use std::f64::consts::PI;

use super::grid::{Grid, GridGeometry};
use super::operator::{prequantum_operator, schrodinger_operator, to_affine, QuantumOperator};
use super::stencil::Stencil;
use crate::error::{Error, Result};
use crate::phase_space::{affine_bracket, bracket_observable, Observable};
use crate::Complex64;

/// Cells a composed first-order stencil reaches from a Dirichlet edge.
pub const INTERIOR_MARGIN: usize = 2;

fn weight(g: &GridGeometry) -> f64 {
    (2.0 * PI).powi(-(g.dims() as i32 - 1)) * g.cell_volume()
}

/// `<rho1|rho2> = (1/2pi)^m sum rho1 conj(rho2) dV`, with `m + 1` grid axes.
pub fn inner_product(rho1: &Grid, rho2: &Grid) -> Result<Complex64> {
    rho1.check_compatible(rho2)?;
    let s: Complex64 = rho1.values.iter().zip(&rho2.values).map(|(a, b)| a * b.conj()).sum();
    Ok(s * weight(&rho1.geometry))
}

pub fn norm(rho: &Grid) -> f64 {
    let s: f64 = rho.values.iter().map(|v| v.norm_sqr()).sum();
    (s * weight(&rho.geometry)).sqrt()
}

fn masked_norm(g: &GridGeometry, v: &[Complex64], mask: &[bool]) -> f64 {
    let s: f64 = v.iter().zip(mask).filter(|(_, &m)| m).map(|(v, _)| v.norm_sqr()).sum();
    (s * weight(g)).sqrt()
}

/// `max ||([A, B] + i C) rho|| / ||rho||` over probes, on interior nodes.
pub fn dirac_residual(
    a: &QuantumOperator,
    b: &QuantumOperator,
    bracket: &QuantumOperator,
    probes: &[Grid],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for rho in probes {
        let g = &rho.geometry;
        let (pa, pb, pc) = (a.prepare(g)?, b.prepare(g)?, bracket.prepare(g)?);
        let ab = pa.apply_values(&pb.apply_values(&rho.values)?)?;
        let ba = pb.apply_values(&pa.apply_values(&rho.values)?)?;
        let c = pc.apply_values(&rho.values)?;
        let i = Complex64::new(0.0, 1.0);
        let r: Vec<Complex64> = (0..ab.len()).map(|k| ab[k] - ba[k] + i * c[k]).collect();
        let mask = g.interior_mask(INTERIOR_MARGIN);
        let denom = masked_norm(g, &rho.values, &mask);
        if denom == 0.0 {
            return Err(Error::GridMismatch("probe vanishes on the interior".into()));
        }
        worst = worst.max(masked_norm(g, &r, &mask) / denom);
    }
    Ok(worst)
}

/// Dirac condition of the Schrödinger representation for two affine observables.
pub fn commutator_residual(f: &Observable, g: &Observable, probes: &[Grid], stencil: Stencil) -> Result<f64> {
    let (f, g) = (to_affine(f)?, to_affine(g)?);
    let bracket = affine_bracket(&f, &g)?;
    dirac_residual(
        &schrodinger_operator(&f)?.with_stencil(stencil),
        &schrodinger_operator(&g)?.with_stencil(stencil),
        &schrodinger_operator(&bracket)?.with_stencil(stencil),
        probes,
    )
}

/// Dirac condition of the prequantum operators on phase-space sections.
pub fn prequantum_commutator_residual(
    f: &Observable,
    g: &Observable,
    probes: &[Grid],
    stencil: Stencil,
) -> Result<f64> {
    let bracket = bracket_observable(f, g)?;
    dirac_residual(
        &prequantum_operator(f)?.with_stencil(stencil),
        &prequantum_operator(g)?.with_stencil(stencil),
        &prequantum_operator(&bracket)?.with_stencil(stencil),
        probes,
    )
}

/// `max |<A rho_i|rho_j> - <rho_i|A rho_j>| / (||rho_i|| ||rho_j||)` over probe pairs.
pub fn hermiticity_residual(op: &QuantumOperator, probes: &[Grid]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let images = probes.iter().map(|p| op.apply(p)).collect::<Result<Vec<_>>>()?;
    for (i, (pi, ai)) in probes.iter().zip(&images).enumerate() {
        for (pj, aj) in probes.iter().zip(&images).skip(i) {
            let d = (inner_product(ai, pj)? - inner_product(pi, aj)?).norm();
            worst = worst.max(d / (norm(pi) * norm(pj)));
        }
    }
    Ok(worst)
}
