use std::collections::BTreeMap;

use nalgebra::{DVector, Unit, UnitQuaternion, Vector4};
use serde::{Deserialize, Serialize};

use super::{fix_gauge_3d, positions_from_rotations, rms_residual_3d, rotation_angle, solve_positions_3d, Reconstruction3};
use crate::error::{Error, Result};
use crate::geometry::{
    angle_between, cayley_homogeneous, rodrigues_from_pair, rotation_from_directions, Lambda, Mat3,
    Pose3, RodriguesVec, UnitVec3, Vec3,
};
use crate::graph::{tangent_basis, CameraId, SightingGraph3};
use crate::optim::{levenberg_marquardt, LeastSquares, LmConfig};
use crate::recon2d::{default_scale_pair, Gauge};

/// Threshold on `|v_kj x v_jk|` below which a link is treated as degenerate.
pub const LINK_DEGENERACY_TOL: f64 = 1e-9;

/// A mutual link `i <-> j` forces `R_j R_i^T u = v` with `u = v_ij` and
/// `v = -v_ji`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationConstraint {
    pub u: UnitVec3,
    pub v: UnitVec3,
}

pub fn relative_rotation_constraint(v_ij: &UnitVec3, v_ji: &UnitVec3) -> RotationConstraint {
    RotationConstraint {
        u: *v_ij,
        v: -*v_ji,
    }
}

impl RotationConstraint {
    /// `u = -v`: the family degenerates to half-turns about axes orthogonal to `u`.
    pub fn is_antipodal(&self) -> bool {
        self.u.cross(&self.v).norm() < LINK_DEGENERACY_TOL && self.u.dot(&self.v) < 0.0
    }

    pub fn family(&self) -> RotationFamily {
        if self.is_antipodal() {
            let (e1, e2) = tangent_basis(&self.u);
            RotationFamily {
                a: (0.0, e1),
                b: (0.0, e2),
            }
        } else {
            RotationFamily {
                a: (1.0 + self.u.dot(&self.v), self.u.cross(&self.v)),
                b: (0.0, self.u.into_inner() + self.v.into_inner()),
            }
        }
    }
}

/// A pencil of rotations in homogeneous Rodrigues coordinates: the member
/// with parameter `lambda = s / t` is `t a + s b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationFamily {
    pub a: (f64, Vec3),
    pub b: (f64, Vec3),
}

impl RotationFamily {
    fn point(&self, x: [f64; 2]) -> (f64, Vec3) {
        (
            x[0] * self.a.0 + x[1] * self.b.0,
            self.a.1 * x[0] + self.b.1 * x[1],
        )
    }

    pub fn at(&self, lambda: Lambda) -> RodriguesVec {
        let (w, v) = self.point(coords(lambda));
        RodriguesVec::from_homogeneous(w, &v)
    }

    pub fn rotation(&self, lambda: Lambda) -> Mat3 {
        self.rotation_at(coords(lambda))
    }

    fn rotation_at(&self, x: [f64; 2]) -> Mat3 {
        let (w, v) = self.point(x);
        cayley_homogeneous(w, &v)
    }

    /// Member closest to `r` in quaternion distance, with that distance.
    pub fn fit(&self, r: &Mat3) -> (Lambda, f64) {
        let q = UnitQuaternion::from_rotation_matrix(&nalgebra::Rotation3::from_matrix_unchecked(*r));
        let q = Vector4::new(q.w, q.i, q.j, q.k);
        let a = Vector4::new(self.a.0, self.a.1.x, self.a.1.y, self.a.1.z);
        let b = Vector4::new(self.b.0, self.b.1.x, self.b.1.y, self.b.1.z);
        let m = nalgebra::Matrix4x2::from_columns(&[a, b]);
        let coef = (m.transpose() * m)
            .try_inverse()
            .map(|inv| inv * m.transpose() * q)
            .unwrap_or_else(nalgebra::Vector2::zeros);
        let residual = (q - m * coef).norm();
        (Lambda::from_homogeneous(coef[1], coef[0]), residual)
    }
}

/// Homogeneous `[t, s]` of a projective parameter.
fn coords(lambda: Lambda) -> [f64; 2] {
    let (s, t) = lambda.homogeneous();
    [t, s]
}

fn to_lambda(x: [f64; 2]) -> Lambda {
    Lambda::from_homogeneous(x[1], x[0])
}

/// Rodrigues vector of the rotation sending `v'_ij` (world direction of the
/// sighting from the reference) to `-v_ji`.
pub fn candidate_rodrigues(v_ji: &UnitVec3, v_ij_world: &UnitVec3, lambda: Lambda) -> Result<RodriguesVec> {
    if 1.0 - v_ji.dot(v_ij_world) < 1e-12 {
        return Err(Error::DegenerateDenominator);
    }
    rodrigues_from_pair(v_ij_world, &-*v_ji, lambda)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkBranch {
    /// `v_kj x v_jk != 0`.
    Regular,
    /// `v_jk = v_kj`: the relative rotation is a half-turn.
    HalfTurn,
    /// `v_jk = -v_kj`: the relative rotation fixes `v_jk`.
    FixedAxis,
}

/// Two equations, each bilinear in the homogeneous parameters `x` of `c_j`
/// and `y` of `c_k`: `E_m(x, y) = sum coeffs[m][a][b] x_a y_b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BilinearSystem {
    pub coeffs: [[[f64; 2]; 2]; 2],
    pub branch: LinkBranch,
    /// Size of the generator products the coefficients are built from.
    pub magnitude: f64,
}

impl BilinearSystem {
    fn eval(&self, x: [f64; 2], y: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (m, o) in out.iter_mut().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    *o += self.coeffs[m][a][b] * x[a] * y[b];
                }
            }
        }
        out
    }

    /// Residuals at normalized homogeneous coordinates of the two parameters.
    pub fn residuals(&self, lambda_j: Lambda, lambda_k: Lambda) -> [f64; 2] {
        self.eval(unit2(coords(lambda_j)), unit2(coords(lambda_k)))
    }

    fn norm(&self) -> f64 {
        self.coeffs.iter().flatten().flatten().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Rows `(alpha_m, beta_m)` of the linear system in `y` at fixed `x`.
    fn rows_for_y(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let mut rows = [[0.0; 2]; 2];
        for m in 0..2 {
            for b in 0..2 {
                rows[m][b] = self.coeffs[m][0][b] * x[0] + self.coeffs[m][1][b] * x[1];
            }
        }
        rows
    }

    /// Rows of the linear system in `x` at fixed `y`.
    fn rows_for_x(&self, y: [f64; 2]) -> [[f64; 2]; 2] {
        let mut rows = [[0.0; 2]; 2];
        for m in 0..2 {
            for a in 0..2 {
                rows[m][a] = self.coeffs[m][a][0] * y[0] + self.coeffs[m][a][1] * y[1];
            }
        }
        rows
    }
}

fn unit2(x: [f64; 2]) -> [f64; 2] {
    let n = x[0].hypot(x[1]);
    [x[0] / n, x[1] / n]
}

/// Kernel of the 2x2 system `rows`, using its larger row; `None` if both
/// rows vanish relative to `scale`.
fn kernel2(rows: [[f64; 2]; 2], scale: f64) -> Option<[f64; 2]> {
    let n0 = rows[0][0].hypot(rows[0][1]);
    let n1 = rows[1][0].hypot(rows[1][1]);
    let r = if n0 >= n1 { rows[0] } else { rows[1] };
    if n0.max(n1) <= 1e-10 * scale {
        return None;
    }
    Some(unit2([-r[1], r[0]]))
}

fn classify_link(v_jk: &UnitVec3, v_kj: &UnitVec3) -> LinkBranch {
    if v_kj.cross(v_jk).norm() >= LINK_DEGENERACY_TOL {
        LinkBranch::Regular
    } else if v_jk.dot(v_kj) > 0.0 {
        LinkBranch::HalfTurn
    } else {
        LinkBranch::FixedAxis
    }
}

/// Equations expressing that `R_k R_j^T` sends `v_jk` to `-v_kj`, for `R_j`
/// and `R_k` drawn from the given families; every branch is covered.
pub fn link_system(
    fam_j: &RotationFamily,
    fam_k: &RotationFamily,
    v_jk: &UnitVec3,
    v_kj: &UnitVec3,
) -> BilinearSystem {
    let branch = classify_link(v_jk, v_kj);
    let cross = v_kj.cross(v_jk);
    let sum = v_kj.into_inner() + v_jk.into_inner();
    let rhs = 1.0 + v_jk.dot(v_kj);
    let (w1, w2) = tangent_basis(v_jk);
    let gens_j = [fam_j.a, fam_j.b];
    let gens_k = [fam_k.a, fam_k.b];
    let mut coeffs = [[[0.0; 2]; 2]; 2];
    let mut magnitude: f64 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let (wj, aj) = gens_j[a];
            let (wk, ak) = gens_k[b];
            magnitude = magnitude.max((wj.abs() + aj.norm()) * (wk.abs() + ak.norm()));
            // homogeneous coordinates of R_k R_j^T
            let d = wj * wk + aj.dot(&ak);
            let n = ak * wj - aj * wk + aj.cross(&ak);
            let e = match branch {
                LinkBranch::Regular => [n.dot(&cross) - rhs * d, n.dot(&sum)],
                LinkBranch::HalfTurn => [d, n.dot(v_jk)],
                LinkBranch::FixedAxis => [n.dot(&w1), n.dot(&w2)],
            };
            coeffs[0][a][b] = e[0];
            coeffs[1][a][b] = e[1];
        }
    }
    BilinearSystem {
        coeffs,
        branch,
        magnitude,
    }
}

/// The pair of bidegree-(1,1) equations of a regular link.
pub fn triangle_quadratics(
    fam_j: &RotationFamily,
    fam_k: &RotationFamily,
    v_jk: &UnitVec3,
    v_kj: &UnitVec3,
) -> Result<BilinearSystem> {
    let sys = link_system(fam_j, fam_k, v_jk, v_kj);
    if sys.branch != LinkBranch::Regular {
        return Err(Error::DegenerateLink);
    }
    Ok(sys)
}

/// Roots `(x, y)` of a bilinear system: eliminating `y` leaves a binary
/// quadratic in `x`, solved in homogeneous form so that infinity is a root
/// like any other.
pub fn solve_bilinear(sys: &BilinearSystem) -> Result<Vec<([f64; 2], [f64; 2])>> {
    let e = &sys.coeffs;
    let scale = sys.norm();
    let mag = sys.magnitude.max(1e-300);
    if scale <= 1e-10 * mag {
        return Err(Error::Underdetermined(
            "one-parameter set of solutions: the link equations vanish identically".into(),
        ));
    }
    // alpha_m = e[m][0][0] x0 + e[m][1][0] x1, beta_m = e[m][0][1] x0 + e[m][1][1] x1
    let (a10, a11, b10, b11) = (e[0][0][0], e[0][1][0], e[0][0][1], e[0][1][1]);
    let (a20, a21, b20, b21) = (e[1][0][0], e[1][1][0], e[1][0][1], e[1][1][1]);
    let qa = a10 * b20 - a20 * b10;
    let qb = a10 * b21 + a11 * b20 - a20 * b11 - a21 * b10;
    let qc = a11 * b21 - a21 * b11;
    let qmax = qa.abs().max(qb.abs()).max(qc.abs());
    if qmax <= 1e-10 * scale * scale {
        return Err(Error::Underdetermined(
            "one-parameter set of solutions: the eliminant vanishes identically".into(),
        ));
    }
    let (qa, qb, qc) = (qa / qmax, qb / qmax, qc / qmax);
    let disc = qb * qb - 4.0 * qa * qc;
    // consistent data makes the eliminant a perfect square; noise splits the
    // double root into a real pair or a complex pair
    let mut xs: Vec<[f64; 2]> = Vec::new();
    if disc < 0.0 {
        if disc < -0.1 {
            return Err(Error::NoRealRoot);
        }
        if qa.abs() >= qc.abs() {
            xs.push(unit2([-qb, 2.0 * qa]));
        } else {
            xs.push(unit2([2.0 * qc, -qb]));
        }
    } else {
        let q = -0.5 * (qb + qb.signum() * disc.sqrt());
        if q.abs() > 1e-300 {
            xs.push(unit2([q, qa]));
            xs.push(unit2([qc, q]));
        } else if qa.abs() >= qc.abs() {
            xs.push([0.0, 1.0]);
        } else {
            xs.push([1.0, 0.0]);
        }
    }
    let mut out: Vec<([f64; 2], [f64; 2])> = Vec::new();
    for x in xs {
        if out.iter().any(|(p, _)| (p[0] * x[1] - p[1] * x[0]).abs() < 1e-14) {
            continue;
        }
        if let Some(y) = kernel2(sys.rows_for_y(x), scale) {
            out.push((x, y));
        }
    }
    if out.is_empty() {
        return Err(Error::Underdetermined(
            "the companion parameter is free at every root".into(),
        ));
    }
    Ok(out)
}

/// Fits the family parameters of the non-reference cameras to every
/// sighting, with positions eliminated by the linear solve.
struct FamilyRefine<'a> {
    g: &'a SightingGraph3,
    reference: CameraId,
    reference_rotation: Mat3,
    members: Vec<(CameraId, RotationFamily)>,
}

impl FamilyRefine<'_> {
    fn rotations(&self, theta: &DVector<f64>) -> BTreeMap<CameraId, Mat3> {
        let mut out = BTreeMap::from([(self.reference, self.reference_rotation)]);
        for (k, (id, fam)) in self.members.iter().enumerate() {
            out.insert(*id, fam.rotation_at([theta[k].cos(), theta[k].sin()]));
        }
        out
    }
}

impl LeastSquares for FamilyRefine<'_> {
    type State = DVector<f64>;

    fn dof(&self) -> usize {
        self.members.len()
    }

    fn residuals(&self, theta: &DVector<f64>) -> DVector<f64> {
        let rotations = self.rotations(theta);
        let Ok(pos) = positions_from_rotations(self.g, &rotations, 0.0) else {
            return DVector::from_element(2 * self.g.len(), std::f64::consts::PI);
        };
        let mut out = Vec::with_capacity(2 * self.g.len());
        for s in self.g.sightings() {
            let pred = rotations[&s.observer] * (pos[&s.target] - pos[&s.observer]);
            out.extend(super::log_residual(&s.bearing, &pred));
        }
        DVector::from_vec(out)
    }

    fn retract(&self, theta: &DVector<f64>, d: &DVector<f64>) -> DVector<f64> {
        theta + d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaPair {
    pub lambda_j: Lambda,
    pub lambda_k: Lambda,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriangleCandidate {
    pub j: CameraId,
    pub k: CameraId,
    pub rotation_j: Mat3,
    pub rotation_k: Mat3,
    pub lambdas: LambdaPair,
    pub branch: LinkBranch,
    /// Every sighting points at a target in front of the linear position fit.
    pub forward: bool,
    pub residual: f64,
}

fn mutual(g: &SightingGraph3, a: CameraId, b: CameraId) -> Result<(UnitVec3, UnitVec3)> {
    match (g.get(a, b), g.get(b, a)) {
        (Some(x), Some(y)) => Ok((*x, *y)),
        _ => Err(Error::InsufficientSightings {
            have: g.len(),
            need: 6,
            detail: format!("missing mutual link {a} <-> {b}"),
        }),
    }
}

/// The family of rotations for `j` allowed by its mutual link with the
/// reference `i` of known rotation `r_i`.
fn reference_family(g: &SightingGraph3, i: CameraId, r_i: &Mat3, j: CameraId) -> Result<RotationFamily> {
    let (v_ij, v_ji) = mutual(g, i, j)?;
    let world = Unit::new_normalize(r_i.transpose() * v_ij.into_inner());
    Ok(relative_rotation_constraint(&world, &v_ji).family())
}

/// Linear positions and their diagnostics for a full set of rotations.
fn score_rotations(g: &SightingGraph3, rotations: &BTreeMap<CameraId, Mat3>) -> Option<(bool, f64)> {
    let pos = positions_from_rotations(g, rotations, 0.0).ok()?;
    let mut forward = true;
    let mut sum = 0.0;
    for s in g.sightings() {
        let d = pos[&s.target] - pos[&s.observer];
        let pred = rotations[&s.observer] * d;
        if s.bearing.dot(&pred) <= 0.0 {
            forward = false;
        }
        let a = angle_between(&s.bearing, &pred);
        sum += a * a;
    }
    Some((forward, (sum / g.len() as f64).sqrt()))
}

fn rank_key(forward: bool, residual: f64, closeness: f64) -> (bool, f64, f64) {
    (!forward, residual, closeness)
}

fn compare_keys(a: (bool, f64, f64), b: (bool, f64, f64)) -> std::cmp::Ordering {
    a.0.cmp(&b.0)
        .then_with(|| {
            if (a.1 - b.1).abs() <= 1e-12 * (1.0 + a.1.max(b.1)) {
                std::cmp::Ordering::Equal
            } else {
                a.1.total_cmp(&b.1)
            }
        })
        .then_with(|| a.2.total_cmp(&b.2))
}

/// Rotation candidates for the two non-reference cameras of a triangle with
/// all six sightings, best first.
pub fn solve_triangle_3d(
    reference: CameraId,
    reference_rotation: &Mat3,
    g: &SightingGraph3,
) -> Result<Vec<TriangleCandidate>> {
    let others: Vec<CameraId> = g.cameras().iter().copied().filter(|&c| c != reference).collect();
    if g.cameras().len() != 3 || others.len() != 2 {
        return Err(Error::InvalidArgument(
            "triangle solve needs three cameras including the reference".into(),
        ));
    }
    let (j, k) = (others[0], others[1]);
    let fam_j = reference_family(g, reference, reference_rotation, j)?;
    let fam_k = reference_family(g, reference, reference_rotation, k)?;
    let (v_jk, v_kj) = mutual(g, j, k)?;
    let sys = link_system(&fam_j, &fam_k, &v_jk, &v_kj);
    let roots = solve_bilinear(&sys)?;
    let refine = FamilyRefine {
        g,
        reference,
        reference_rotation: *reference_rotation,
        members: vec![(j, fam_j), (k, fam_k)],
    };
    let mut out = Vec::new();
    for (x, y) in roots {
        let start = DVector::from_vec(vec![angle_of(x), angle_of(y)]);
        let theta = levenberg_marquardt(&refine, start, &LmConfig::default()).state;
        let x = [theta[0].cos(), theta[0].sin()];
        let y = [theta[1].cos(), theta[1].sin()];
        let r_j = fam_j.rotation_at(x);
        let r_k = fam_k.rotation_at(y);
        let rotations = BTreeMap::from([(reference, *reference_rotation), (j, r_j), (k, r_k)]);
        let Some((forward, residual)) = score_rotations(g, &rotations) else {
            continue;
        };
        out.push(TriangleCandidate {
            j,
            k,
            rotation_j: r_j,
            rotation_k: r_k,
            lambdas: LambdaPair {
                lambda_j: to_lambda(x),
                lambda_k: to_lambda(y),
            },
            branch: sys.branch,
            forward,
            residual,
        });
    }
    let closeness = |c: &TriangleCandidate| {
        rotation_angle(&(c.rotation_j * reference_rotation.transpose()))
            + rotation_angle(&(c.rotation_k * reference_rotation.transpose()))
    };
    out.sort_by(|a, b| {
        compare_keys(
            rank_key(a.forward, a.residual, closeness(a)),
            rank_key(b.forward, b.residual, closeness(b)),
        )
    });
    if out.is_empty() {
        return Err(Error::NoRealRoot);
    }
    Ok(out)
}

/// Triangle reconstruction with the smallest camera as identity reference.
pub fn reconstruct_triangle_3d(g: &SightingGraph3) -> Result<Reconstruction3> {
    let reference = *g
        .cameras()
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty graph".into()))?;
    let best = solve_triangle_3d(reference, &Mat3::identity(), g)?.remove(0);
    let rotations = BTreeMap::from([
        (reference, Mat3::identity()),
        (best.j, best.rotation_j),
        (best.k, best.rotation_k),
    ]);
    solve_positions_3d(g, &rotations)
}

/// Tetrahedron from its four faces: shapes from the vertex angles, shared
/// edges equated, the mirror image rejected by the rotation fit.
pub fn solve_tetrahedron_faces(g: &SightingGraph3) -> Result<Reconstruction3> {
    solve_tetrahedron_faces_with(g, 1e-6)
}

pub fn solve_tetrahedron_faces_with(g: &SightingGraph3, tol: f64) -> Result<Reconstruction3> {
    let c: [CameraId; 4] = g.cameras().try_into().map_err(|_| {
        Error::InvalidArgument(format!("tetrahedron needs 4 cameras, got {}", g.cameras().len()))
    })?;
    if g.len() != 12 {
        return Err(Error::InsufficientSightings {
            have: g.len(),
            need: 12,
            detail: "the face route needs every sighting".into(),
        });
    }
    let angle_at = |v: usize, a: usize, b: usize| -> f64 {
        angle_between(g.get(c[v], c[a]).unwrap(), g.get(c[v], c[b]).unwrap())
    };
    // relative edge lengths of face (p, q, r): opposite sides proportional to sines
    let face = |p: usize, q: usize, r: usize| -> Result<[f64; 3]> {
        let angles = [angle_at(p, q, r), angle_at(q, p, r), angle_at(r, p, q)];
        if angles.iter().any(|&a| !(1e-9..=std::f64::consts::PI - 1e-9).contains(&a)) {
            return Err(Error::DegenerateFace {
                face: [c[p], c[q], c[r]],
            });
        }
        // [|qr|, |pr|, |pq|]
        Ok(angles.map(f64::sin))
    };
    let f012 = face(0, 1, 2)?;
    let f013 = face(0, 1, 3)?;
    let f023 = face(0, 2, 3)?;
    let f123 = face(1, 2, 3)?;
    let d01 = 1.0;
    let d02 = f012[1] / f012[2];
    let d12 = f012[0] / f012[2];
    let d03 = f013[1] / f013[2];
    let d13 = f013[0] / f013[2];
    // face 023 scaled on edge 02, face 123 on edge 12
    let d23_a = f023[0] / f023[2] * d02;
    let d03_b = f023[1] / f023[2] * d02;
    let d23_b = f123[0] / f123[2] * d12;
    let d13_b = f123[1] / f123[2] * d12;
    let defect = [
        (d03 - d03_b).abs() / d03,
        (d13 - d13_b).abs() / d13,
        (d23_a - d23_b).abs() / d23_a,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if defect > tol {
        return Err(Error::InconsistentFaces { defect });
    }
    let d23 = 0.5 * (d23_a + d23_b);

    let x2 = (d01 * d01 + d02 * d02 - d12 * d12) / (2.0 * d01);
    let y2 = (d02 * d02 - x2 * x2).max(0.0).sqrt();
    let x3 = (d01 * d01 + d03 * d03 - d13 * d13) / (2.0 * d01);
    let y3 = (x2 * x2 + y2 * y2 - 2.0 * x3 * x2 - d23 * d23 + d03 * d03) / (2.0 * y2);
    let z3_sq = d03 * d03 - x3 * x3 - y3 * y3;
    if z3_sq < -tol {
        return Err(Error::InconsistentFaces { defect: -z3_sq });
    }
    let z3 = z3_sq.max(0.0).sqrt();

    let mut best: Option<(f64, BTreeMap<CameraId, Pose3>)> = None;
    for mirror in [1.0, -1.0] {
        let pts = [
            Vec3::zeros(),
            Vec3::new(d01, 0.0, 0.0),
            Vec3::new(x2, y2, 0.0),
            Vec3::new(x3, y3, mirror * z3),
        ];
        let mut poses = BTreeMap::new();
        for v in 0..4 {
            let pairs: Vec<(UnitVec3, UnitVec3)> = (0..4)
                .filter(|&w| w != v)
                .map(|w| (Unit::new_normalize(pts[w] - pts[v]), *g.get(c[v], c[w]).unwrap()))
                .collect();
            let r = rotation_from_directions(&pairs)?;
            poses.insert(c[v], Pose3::new_orthonormalized(pts[v], r)?);
        }
        let rms = rms_residual_3d(g, &poses);
        if best.as_ref().is_none_or(|(b, _)| rms < *b) {
            best = Some((rms, poses));
        }
    }
    let (_, poses) = best.unwrap();
    let gauge = Gauge {
        anchor: c[0],
        scale_pair: default_scale_pair(g)?,
    };
    let poses = fix_gauge_3d(&poses, gauge)?;
    let residual = rms_residual_3d(g, &poses);
    Ok(Reconstruction3 {
        poses,
        gauge,
        residual,
    })
}

/// Links among the non-reference cameras of a tetrahedron, with their
/// equations over the parameters of the two endpoint families.
struct LinkEquations {
    p: usize,
    q: usize,
    sys: BilinearSystem,
    scale: f64,
}

struct LambdaFit<'a> {
    links: &'a [LinkEquations],
}

impl LeastSquares for LambdaFit<'_> {
    type State = DVector<f64>;

    fn dof(&self) -> usize {
        3
    }

    fn residuals(&self, theta: &DVector<f64>) -> DVector<f64> {
        let x = |k: usize| [theta[k].cos(), theta[k].sin()];
        let mut out = Vec::with_capacity(2 * self.links.len());
        for l in self.links {
            let e = l.sys.eval(x(l.p), x(l.q));
            out.push(e[0] / l.scale);
            out.push(e[1] / l.scale);
        }
        DVector::from_vec(out)
    }

    fn retract(&self, theta: &DVector<f64>, d: &DVector<f64>) -> DVector<f64> {
        theta + d
    }
}

fn angle_of(x: [f64; 2]) -> f64 {
    x[1].atan2(x[0])
}

/// Over-determined tetrahedron solve from a reference vertex: the link
/// equations of every mutual pair among the other three cameras are fitted
/// jointly over the three family parameters.
pub fn solve_tetrahedron_bidir(
    reference: CameraId,
    reference_rotation: &Mat3,
    g: &SightingGraph3,
) -> Result<Reconstruction3> {
    let others: Vec<CameraId> = g.cameras().iter().copied().filter(|&c| c != reference).collect();
    if g.cameras().len() != 4 || others.len() != 3 {
        return Err(Error::InvalidArgument(
            "tetrahedron solve needs four cameras including the reference".into(),
        ));
    }
    let fams = others
        .iter()
        .map(|&o| reference_family(g, reference, reference_rotation, o))
        .collect::<Result<Vec<_>>>()?;
    let mut links = Vec::new();
    for p in 0..3 {
        for q in p + 1..3 {
            if let (Some(a), Some(b)) = (g.get(others[p], others[q]), g.get(others[q], others[p])) {
                let sys = link_system(&fams[p], &fams[q], a, b);
                let scale = sys.norm().max(1e-300);
                links.push(LinkEquations { p, q, sys, scale });
            }
        }
    }
    if links.len() < 2 {
        return Err(Error::InsufficientSightings {
            have: g.len(),
            need: 10,
            detail: "need two mutual links among the non-reference cameras".into(),
        });
    }

    // seeds: roots of each link, completed through the other links
    let mut seeds: Vec<[f64; 3]> = Vec::new();
    for l in &links {
        let Ok(roots) = solve_bilinear(&l.sys) else {
            continue;
        };
        let r = 3 - l.p - l.q;
        for (x, y) in roots {
            let mut known: [Option<[f64; 2]>; 3] = [None; 3];
            known[l.p] = Some(x);
            known[l.q] = Some(y);
            for m in &links {
                if known[r].is_some() {
                    break;
                }
                let z = if m.q == r && known[m.p].is_some() {
                    kernel2(m.sys.rows_for_y(known[m.p].unwrap()), m.scale)
                } else if m.p == r && known[m.q].is_some() {
                    kernel2(m.sys.rows_for_x(known[m.q].unwrap()), m.scale)
                } else {
                    None
                };
                known[r] = z;
            }
            let fill = known[r].unwrap_or([1.0, 0.0]);
            known[r] = Some(fill);
            seeds.push([
                angle_of(known[0].unwrap()),
                angle_of(known[1].unwrap()),
                angle_of(known[2].unwrap()),
            ]);
        }
    }
    if seeds.is_empty() {
        seeds.extend((0..4).map(|k| {
            let t = k as f64 * 0.7;
            [t, t + 0.3, t + 0.6]
        }));
    }

    let problem = LambdaFit { links: &links };
    let refine = FamilyRefine {
        g,
        reference,
        reference_rotation: *reference_rotation,
        members: others.iter().copied().zip(fams.iter().copied()).collect(),
    };
    let config = LmConfig::default();
    let mut best: Option<((bool, f64, f64), DVector<f64>)> = None;
    for seed in seeds {
        let linked = levenberg_marquardt(&problem, DVector::from_row_slice(&seed), &config).state;
        let theta = levenberg_marquardt(&refine, linked, &config).state;
        let Some((forward, residual)) = score_rotations(g, &refine.rotations(&theta)) else {
            continue;
        };
        let key = rank_key(forward, residual, 0.0);
        if best
            .as_ref()
            .is_none_or(|(b, _)| compare_keys(key, *b) == std::cmp::Ordering::Less)
        {
            best = Some((key, theta));
        }
    }
    let (_, theta) = best.ok_or(Error::NoConvergence {
        iterations: config.max_iterations,
        rms: f64::INFINITY,
    })?;
    let jac = refine.jacobian(&theta, &refine.residuals(&theta), 1e-7);
    let sv = jac.singular_values();
    if sv.min() <= 1e-8 * sv.max().max(1e-300) {
        return Err(Error::Underdetermined(
            "the sightings do not fix all three rotations".into(),
        ));
    }
    let rotations = refine.rotations(&theta);
    solve_positions_3d(g, &rotations)
}
