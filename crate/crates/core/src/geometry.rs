//! Single-patch tensor-product spline geometry maps `G: [0,1]^2 -> Omega`
//! and the chain rule for physical gradients and Laplacians.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::spline::{KnotVector, QuadRule, SplineSpace};

/// Geometry data at one parameter point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MappedPointData {
    pub point: [f64; 2],
    /// `jac[i][j] = d G_i / d xhat_j`
    pub jac: [[f64; 2]; 2],
    /// signed determinant of `jac`
    pub det: f64,
    pub jac_inv: [[f64; 2]; 2],
    /// `hess[m][i][j] = d^2 G_m / d xhat_i d xhat_j`
    pub hess: [[[f64; 2]; 2]; 2],
}

impl MappedPointData {
    pub fn abs_det(&self) -> f64 {
        self.det.abs()
    }

    /// Physical gradient `J^{-T} grad_hat`.
    pub fn physical_gradient(&self, grad_hat: [f64; 2]) -> [f64; 2] {
        let ji = &self.jac_inv;
        [
            ji[0][0] * grad_hat[0] + ji[1][0] * grad_hat[1],
            ji[0][1] * grad_hat[0] + ji[1][1] * grad_hat[1],
        ]
    }

    /// Physical gradient and Laplacian of `phi_hat o G^{-1}` from the
    /// parametric gradient and Hessian of `phi_hat`.
    pub fn physical_laplacian(&self, grad_hat: [f64; 2], hess_hat: [[f64; 2]; 2]) -> ([f64; 2], f64) {
        let g = self.physical_gradient(grad_hat);
        // H_hat - sum_m (grad phi)_m Hess(G_m)
        let mut h = hess_hat;
        for m in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    h[i][j] -= g[m] * self.hess[m][i][j];
                }
            }
        }
        // trace(J^{-T} h J^{-1}) = sum_{i,j} h_ij (J^{-1} J^{-T})_{ji}
        let ji = &self.jac_inv;
        let mut lap = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let g_ji = ji[j][0] * ji[i][0] + ji[j][1] * ji[i][1];
                lap += h[i][j] * g_ji;
            }
        }
        (g, lap)
    }
}

/// A bivariate spline map with control points `ctrl[a * n_v + b]`.
#[derive(Clone, Debug)]
pub struct GeometryMap {
    name: String,
    knots: [KnotVector; 2],
    ctrl: Vec<[f64; 2]>,
    spaces: [SplineSpace; 2],
}

impl PartialEq for GeometryMap {
    fn eq(&self, other: &Self) -> bool {
        self.knots == other.knots && self.ctrl == other.ctrl
    }
}

impl GeometryMap {
    pub fn new(name: &str, knots: [KnotVector; 2], ctrl: Vec<[f64; 2]>) -> Result<Self> {
        let n = knots[0].dim() * knots[1].dim();
        if ctrl.len() != n {
            return Err(Error::InvalidSpline(format!(
                "geometry needs {n} control points, got {}",
                ctrl.len()
            )));
        }
        for kv in &knots {
            let (lo, hi) = kv.domain();
            if lo != 0.0 || hi != 1.0 {
                return Err(Error::InvalidSpline("geometry parameter domain must be [0,1]".into()));
            }
        }
        let spaces = [
            SplineSpace::from_knot_vector(knots[0].clone()),
            SplineSpace::from_knot_vector(knots[1].clone()),
        ];
        let geo = Self {
            name: name.to_string(),
            knots,
            ctrl,
            spaces,
        };
        geo.check_regular()?;
        Ok(geo)
    }

    /// `G(u,v) = (u,v)`.
    pub fn identity() -> Self {
        Self::rectangle("identity", 0.0, 1.0, 0.0, 1.0).expect("identity geometry is regular")
    }

    /// Affine map onto `(a,b) x (c,d)`.
    pub fn box_domain(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if !(b > a && d > c) {
            return Err(Error::Config(format!("empty box ({a},{b})x({c},{d})")));
        }
        Self::rectangle("box", a, b, c, d)
    }

    fn rectangle(name: &str, a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let kv = KnotVector::new(1, 0, &[0.0, 1.0])?;
        Self::new(name, [kv.clone(), kv], vec![[a, c], [a, d], [b, c], [b, d]])
    }

    /// Degree-(2,2) single-patch approximation of the quarter annulus with
    /// radii 1 and 2. Direction 1 follows the quadratic arc from (1,0) to
    /// (0,1), direction 2 scales it radially by `1 + v`.
    pub fn quarter_annulus() -> Self {
        let kv = KnotVector::new(2, 1, &[0.0, 1.0]).expect("valid knot vector");
        let arc = [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        // linear 1 + v degree-elevated to 2
        let radial = [1.0, 1.5, 2.0];
        let mut ctrl = Vec::with_capacity(9);
        for p in arc {
            for r in radial {
                ctrl.push([r * p[0], r * p[1]]);
            }
        }
        Self::new("quarter_annulus", [kv.clone(), kv], ctrl).expect("quarter annulus is regular")
    }

    /// Look up a named built-in geometry.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "identity" => Ok(Self::identity()),
            "box" => Self::box_domain(0.0, 2.0, 0.0, 3.0),
            "quarter_annulus" => Ok(Self::quarter_annulus()),
            other => Err(Error::Config(format!("unknown geometry '{other}'"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn knots(&self) -> &[KnotVector; 2] {
        &self.knots
    }

    pub fn control_points(&self) -> &[[f64; 2]] {
        &self.ctrl
    }

    /// Parametric spline spaces of the two directions.
    pub fn spaces(&self) -> &[SplineSpace; 2] {
        &self.spaces
    }

    /// Map, Jacobian and Hessians at a parameter point.
    pub fn eval_map(&self, u: f64, v: f64) -> Result<MappedPointData> {
        let [su, sv] = self.spaces();
        let (fu, du) = su.eval_ders(u, 2)?;
        let (fv, dv) = sv.eval_ders(v, 2)?;
        let (pu, pv) = (su.degree() + 1, sv.degree() + 1);
        let nv = sv.dim();
        // derivative tables are laid out [order][local index]
        let bu = |r: usize, a: usize| du[r * pu + a];
        let bv = |r: usize, b: usize| dv[r * pv + b];
        let mut point = [0.0; 2];
        let mut jac = [[0.0; 2]; 2];
        let mut hess = [[[0.0; 2]; 2]; 2];
        for a in 0..pu {
            for b in 0..pv {
                let c = self.ctrl[(fu + a) * nv + fv + b];
                let w00 = bu(0, a) * bv(0, b);
                let w10 = bu(1, a) * bv(0, b);
                let w01 = bu(0, a) * bv(1, b);
                let w20 = bu(2, a) * bv(0, b);
                let w11 = bu(1, a) * bv(1, b);
                let w02 = bu(0, a) * bv(2, b);
                for m in 0..2 {
                    point[m] += w00 * c[m];
                    jac[m][0] += w10 * c[m];
                    jac[m][1] += w01 * c[m];
                    hess[m][0][0] += w20 * c[m];
                    hess[m][0][1] += w11 * c[m];
                    hess[m][1][1] += w02 * c[m];
                }
            }
        }
        for h in &mut hess {
            h[1][0] = h[0][1];
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let scale = jac.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs()));
        if det.abs() <= 1e-13 * scale * scale || !det.is_finite() {
            return Err(Error::SingularJacobian { u, v, det });
        }
        let jac_inv = [
            [jac[1][1] / det, -jac[0][1] / det],
            [-jac[1][0] / det, jac[0][0] / det],
        ];
        Ok(MappedPointData {
            point,
            jac,
            det,
            jac_inv,
            hess,
        })
    }

    pub fn map_point(&self, u: f64, v: f64) -> Result<[f64; 2]> {
        Ok(self.eval_map(u, v)?.point)
    }

    /// The determinant must keep one sign on a Gauss grid of every cell.
    fn check_regular(&self) -> Result<()> {
        let [su, sv] = self.spaces();
        let n = su.degree().max(sv.degree()) + 2;
        let qu = QuadRule::gauss(su.breaks(), n, &[])?;
        let qv = QuadRule::gauss(sv.breaks(), n, &[])?;
        let mut sign = 0.0;
        for cu in qu.cells() {
            for cv in qv.cells() {
                for &u in &cu.points {
                    for &v in &cv.points {
                        let d = self.eval_map(u, v)?.det;
                        if sign == 0.0 {
                            sign = d.signum();
                        } else if d.signum() != sign {
                            return Err(Error::SingularJacobian { u, v, det: d });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Parameter point mapped to `x`, by damped Newton (tolerance 1e-12).
    pub fn invert(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let mut uv = [0.5, 0.5];
        for _ in 0..100 {
            let d = self.eval_map(uv[0], uv[1])?;
            let r = [d.point[0] - x[0], d.point[1] - x[1]];
            let rn = r[0].hypot(r[1]);
            if rn < 1e-12 {
                return Ok(uv);
            }
            let step = [
                d.jac_inv[0][0] * r[0] + d.jac_inv[0][1] * r[1],
                d.jac_inv[1][0] * r[0] + d.jac_inv[1][1] * r[1],
            ];
            let mut t = 1.0;
            loop {
                let cand = [
                    (uv[0] - t * step[0]).clamp(0.0, 1.0),
                    (uv[1] - t * step[1]).clamp(0.0, 1.0),
                ];
                let p = self.map_point(cand[0], cand[1])?;
                if (p[0] - x[0]).hypot(p[1] - x[1]) < rn || t < 1e-4 {
                    uv = cand;
                    break;
                }
                t *= 0.5;
            }
        }
        Err(Error::Breakdown(format!(
            "geometry inversion did not converge for ({}, {})",
            x[0], x[1]
        )))
    }

    /// Plain-text serialization, see [`GeometryMap::from_text`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "name {}", self.name);
        let _ = writeln!(s, "degrees {} {}", self.knots[0].degree(), self.knots[1].degree());
        for (tag, kv) in ["knots_u", "knots_v"].iter().zip(&self.knots) {
            let ks: Vec<String> = kv.knots().iter().map(|k| format!("{k}")).collect();
            let _ = writeln!(s, "{tag} {}", ks.join(" "));
        }
        let _ = writeln!(s, "points");
        for c in &self.ctrl {
            let _ = writeln!(s, "{} {}", c[0], c[1]);
        }
        s
    }

    /// Parse the plain-text control net format:
    ///
    /// ```text
    /// # comment
    /// name my_patch
    /// degrees 2 2
    /// knots_u 0 0 0 1 1 1
    /// knots_v 0 0 0 1 1 1
    /// points
    /// x y      <- one row per control point, u-index major
    /// ```
    pub fn from_text(text: &str) -> Result<Self> {
        let mut name = "custom".to_string();
        let mut degrees: Option<(usize, usize)> = None;
        let mut ku: Option<Vec<f64>> = None;
        let mut kv: Option<Vec<f64>> = None;
        let mut pts = Vec::new();
        let mut in_points = false;
        let num = |s: &str, line: usize| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {line}: bad number '{s}'")))
        };
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let t = raw.split('#').next().unwrap().trim();
            if t.is_empty() {
                continue;
            }
            let mut f = t.split_whitespace();
            let head = f.next().unwrap();
            if in_points {
                let x = num(head, line)?;
                let y = num(
                    f.next()
                        .ok_or_else(|| Error::Parse(format!("line {line}: expected two coordinates")))?,
                    line,
                )?;
                pts.push([x, y]);
                continue;
            }
            match head {
                "name" => name = f.collect::<Vec<_>>().join(" "),
                "degrees" => {
                    let v: Vec<f64> = f.map(|s| num(s, line)).collect::<Result<_>>()?;
                    if v.len() != 2 {
                        return Err(Error::Parse(format!("line {line}: expected two degrees")));
                    }
                    degrees = Some((v[0] as usize, v[1] as usize));
                }
                "knots_u" => ku = Some(f.map(|s| num(s, line)).collect::<Result<_>>()?),
                "knots_v" => kv = Some(f.map(|s| num(s, line)).collect::<Result<_>>()?),
                "points" => in_points = true,
                other => return Err(Error::Parse(format!("line {line}: unknown key '{other}'"))),
            }
        }
        let (pu, pv) = degrees.ok_or_else(|| Error::Parse("missing 'degrees'".into()))?;
        let ku = KnotVector::from_knots(pu, ku.ok_or_else(|| Error::Parse("missing 'knots_u'".into()))?)?;
        let kv = KnotVector::from_knots(pv, kv.ok_or_else(|| Error::Parse("missing 'knots_v'".into()))?)?;
        Self::new(&name, [ku, kv], pts)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
