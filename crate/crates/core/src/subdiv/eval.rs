use nalgebra::Vector2;

use crate::error::{Error, Result};

use super::basis::RegularBasis;
use super::patch::{PatchEntry, PatchKind};
use super::valence::{valence_table, MAX_LEVEL};

const DOMAIN_EPS: f64 = 1e-12;

fn check_domain(v: f64, w: f64) -> Result<(f64, f64)> {
    if !(v.is_finite() && w.is_finite()) || v < -DOMAIN_EPS || w < -DOMAIN_EPS || v + w > 1.0 + DOMAIN_EPS {
        return Err(Error::Domain { v, w });
    }
    let (v, w) = (v.max(0.0), w.max(0.0));
    let s = v + w;
    Ok(if s > 1.0 { (v / s, w / s) } else { (v, w) })
}

fn wrong_kind() -> Error {
    Error::PatchConditionViolated {
        face: usize::MAX,
        reason: "boundary patches have no closed-form basis".into(),
    }
}

/// Limit-surface weights of the patch control points at `(v, w)`.
pub fn eval_basis(patch: &PatchEntry, v: f64, w: f64) -> Result<Vec<f64>> {
    let (v, w) = check_domain(v, w)?;
    match patch.kind {
        PatchKind::Regular => Ok(RegularBasis::get().eval(v, w).to_vec()),
        PatchKind::Irregular(n) => {
            let table = valence_table(n)?;
            if v == 0.0 && w == 0.0 {
                return Ok(table.limit_weights().to_vec());
            }
            let (v, w) = clamp_near_corner(v, w);
            let (scale, level) = level_of(v + w);
            let p = Vector2::new(v, w) * scale;
            let (m, frame) = table.tile(p.x, p.y, level);
            let l = clamp_local(frame.local(p));
            let b = RegularBasis::get().eval(l.x, l.y);
            let mut out = combine(&b, m);
            for (o, l) in out.iter_mut().zip(table.limit_weights()) {
                *o += l;
            }
            Ok(out)
        }
        PatchKind::Boundary => Err(wrong_kind()),
    }
}

/// `(d/dv, d/dw)` of the weights returned by [`eval_basis`].
pub fn eval_basis_derivatives(patch: &PatchEntry, v: f64, w: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (v, w) = check_domain(v, w)?;
    match patch.kind {
        PatchKind::Regular => {
            let (dv, dw) = RegularBasis::get().eval_derivatives(v, w);
            Ok((dv.to_vec(), dw.to_vec()))
        }
        PatchKind::Irregular(n) => {
            let table = valence_table(n)?;
            let (v, w) = if v == 0.0 && w == 0.0 {
                (f64::EPSILON, f64::EPSILON)
            } else {
                (v, w)
            };
            let (v, w) = clamp_near_corner(v, w);
            let (scale, level) = level_of(v + w);
            let p = Vector2::new(v, w) * scale;
            let (m, frame) = table.tile(p.x, p.y, level);
            let l = clamp_local(frame.local(p));
            let (bv, bw) = RegularBasis::get().eval_derivatives(l.x, l.y);
            let j = frame.jacobian();
            let chain = |col: usize| -> [f64; 12] {
                std::array::from_fn(|i| scale * (bv[i] * j[(0, col)] + bw[i] * j[(1, col)]))
            };
            Ok((combine(&chain(0), m), combine(&chain(1), m)))
        }
        PatchKind::Boundary => Err(wrong_kind()),
    }
}

/// Points closer to the extraordinary corner than the deepest ring are
/// pulled out onto it.
fn clamp_near_corner(v: f64, w: f64) -> (f64, f64) {
    let floor = 0.5f64.powi(MAX_LEVEL as i32);
    let s = v + w;
    if s < floor {
        (v * floor / s, w * floor / s)
    } else {
        (v, w)
    }
}

/// Power-of-two scale bringing `s` into `[1/2, 1]`, and its exponent.
fn level_of(s: f64) -> (f64, usize) {
    let mut scale = 1.0;
    let mut level = 0;
    while s * scale < 0.5 && level < MAX_LEVEL {
        scale *= 2.0;
        level += 1;
    }
    (scale, level)
}

fn clamp_local(l: Vector2<f64>) -> Vector2<f64> {
    let (v, w) = (l.x.max(0.0), l.y.max(0.0));
    let s = v + w;
    if s > 1.0 {
        Vector2::new(v / s, w / s)
    } else {
        Vector2::new(v, w)
    }
}

fn combine(b: &[f64; 12], m: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    (0..m.ncols())
        .map(|j| (0..12).map(|i| b[i] * m[(i, j)]).sum())
        .collect()
}
