use serde::{Deserialize, Serialize};

use crate::assembly::{Discretization, TensorSpace};
use crate::error::{Error, Result};
use crate::geometry::GeometryMap;
use crate::spline::SplineSpace;

/// One evaluation point of a space-time field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub t: f64,
    /// physical coordinates
    pub x: [f64; 2],
    pub value: f64,
}

fn check_unit(name: &str, v: &[f64]) -> Result<()> {
    match v.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
        Some(&x) => Err(Error::Config(format!("{name} sample {x} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// Evaluate full space-time state coefficients (time-major, unreduced
/// bases) on the tensor grid `ts x us x vs` of parameter points. Samples are
/// ordered with `t` slowest and `v` fastest.
pub fn sample_field(
    disc: &Discretization,
    coeffs_full: &[f64],
    ts: &[f64],
    us: &[f64],
    vs: &[f64],
) -> Result<Vec<FieldSample>> {
    sample_tensor(&disc.geometry, &disc.spaces.time_y, &disc.spaces.space_y, coeffs_full, ts, us, vs)
}

/// Same as [`sample_field`] for control-space coefficients (`u`, `lambda`).
pub fn sample_control(
    disc: &Discretization,
    coeffs: &[f64],
    ts: &[f64],
    us: &[f64],
    vs: &[f64],
) -> Result<Vec<FieldSample>> {
    sample_tensor(&disc.geometry, &disc.spaces.time_u, &disc.spaces.space_u, coeffs, ts, us, vs)
}

fn sample_tensor(
    geo: &GeometryMap,
    time: &SplineSpace,
    space: &TensorSpace,
    coeffs_full: &[f64],
    ts: &[f64],
    us: &[f64],
    vs: &[f64],
) -> Result<Vec<FieldSample>> {
    check_unit("t", ts)?;
    check_unit("u", us)?;
    check_unit("v", vs)?;
    let [su, sv] = &space.dirs;
    let (nv, nx) = (sv.dim(), su.dim() * sv.dim());
    if coeffs_full.len() != time.dim() * nx {
        return Err(Error::DimensionMismatch(format!(
            "field has {} coefficients, expected {}",
            coeffs_full.len(),
            time.dim() * nx
        )));
    }
    let bu: Vec<_> = us.iter().map(|&u| su.eval_basis(u, 0)).collect::<Result<_>>()?;
    let bv: Vec<_> = vs.iter().map(|&v| sv.eval_basis(v, 0)).collect::<Result<_>>()?;
    let mut pts = Vec::with_capacity(us.len() * vs.len());
    for &u in us {
        for &v in vs {
            pts.push(geo.map_point(u, v)?);
        }
    }
    let mut out = Vec::with_capacity(ts.len() * pts.len());
    for &t in ts {
        let (ft, nt) = time.eval_basis(t, 0)?;
        // spatial coefficient slice at time t
        let mut slice = vec![0.0; nx];
        for (a, &w) in nt.iter().enumerate() {
            let row = &coeffs_full[(ft + a) * nx..(ft + a + 1) * nx];
            for (s, &c) in slice.iter_mut().zip(row) {
                *s += w * c;
            }
        }
        for (iu, (fu, nuv)) in bu.iter().enumerate() {
            for (iv, (fv, nvv)) in bv.iter().enumerate() {
                let mut val = 0.0;
                for (a, &wa) in nuv.iter().enumerate() {
                    for (b, &wb) in nvv.iter().enumerate() {
                        val += wa * wb * slice[(fu + a) * nv + fv + b];
                    }
                }
                out.push(FieldSample {
                    t,
                    x: pts[iu * vs.len() + iv],
                    value: val,
                });
            }
        }
    }
    Ok(out)
}
