//! Interface-fitted, terrain-following quadrilateral mesh of `Ω(u)`.
//!
//! Column `i` carries `N1 + 1` equispaced nodes on `[−H, u(x_i)]` followed by `N2`
//! equispaced nodes on `(u(x_i), u(x_i) + d]`; row `j = N1` lies exactly on the
//! interface and is shared by both layers, so the discrete space is conforming
//! across `Σ(u)`.
//!
//! A column is collapsed when `u(x_i) + H ≤ eps_touch`. Its lower nodes become
//! ground-plate (Dirichlet) nodes, and lower cells whose two vertical edges are both
//! collapsed have zero area and are deactivated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{eps_touch, Layer, PhysicalParams, Profile};

/// Condition imposed on the lateral sides `x = ±L`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LateralBoundary {
    /// `ψ = h_u` on the sides, so `χ` vanishes on all of `∂Ω(u)`.
    #[default]
    Dirichlet,
    /// Zero conormal flux on the sides; only the ground plate and the top are
    /// Dirichlet boundaries.
    Insulated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub n1: usize,
    pub n2: usize,
    #[serde(default)]
    pub lateral: LateralBoundary,
}

impl MeshSpec {
    pub fn new(n1: usize, n2: usize) -> Self {
        MeshSpec { n1, n2, lateral: LateralBoundary::Dirichlet }
    }

    pub fn with_lateral(mut self, lateral: LateralBoundary) -> Self {
        self.lateral = lateral;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeTag {
    Bottom,
    Side,
    Top,
    Interior,
    Interface,
}

impl NodeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeTag::Bottom => "bottom",
            NodeTag::Side => "side",
            NodeTag::Top => "top",
            NodeTag::Interior => "interior",
            NodeTag::Interface => "interface",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadElement {
    /// Counter-clockwise: `(i, j)`, `(i+1, j)`, `(i+1, j+1)`, `(i, j+1)`.
    pub nodes: [usize; 4],
    pub layer: Layer,
    pub sigma: f64,
    pub active: bool,
}

#[derive(Clone, Debug)]
pub struct LayeredMesh {
    params: PhysicalParams,
    nx: usize,
    n1: usize,
    n2: usize,
    lateral: LateralBoundary,
    x: Vec<f64>,
    z: Vec<f64>,
    tags: Vec<NodeTag>,
    collapsed: Vec<bool>,
    elements: Vec<QuadElement>,
    profile_digest: u64,
}

pub fn build_mesh(profile: &Profile, spec: MeshSpec) -> Result<LayeredMesh> {
    LayeredMesh::build(profile, spec)
}

impl LayeredMesh {
    pub fn build(profile: &Profile, spec: MeshSpec) -> Result<Self> {
        let MeshSpec { n1, n2, lateral } = spec;
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidMesh(format!("layer cell counts must be positive, got N1 = {n1}, N2 = {n2}")));
        }
        let params = *profile.params();
        params.validate()?;
        let (h, d) = (params.ground_depth, params.thickness);
        let nx = profile.nx();
        let rows = n1 + n2 + 1;
        let touch = eps_touch(h);

        let collapsed: Vec<bool> = profile.u().iter().map(|u| u + h <= touch).collect();
        let mut z = Vec::with_capacity((nx + 1) * rows);
        let mut tags = Vec::with_capacity((nx + 1) * rows);
        for (i, &u) in profile.u().iter().enumerate() {
            for j in 0..rows {
                let zj = if j < n1 {
                    if collapsed[i] {
                        -h
                    } else {
                        -h + (u + h) * j as f64 / n1 as f64
                    }
                } else if j == n1 {
                    u
                } else {
                    u + d * (j - n1) as f64 / n2 as f64
                };
                z.push(zj);
                let tag = if j == 0 || (collapsed[i] && j <= n1) {
                    NodeTag::Bottom
                } else if j == rows - 1 {
                    NodeTag::Top
                } else if i == 0 || i == nx {
                    NodeTag::Side
                } else if j == n1 {
                    NodeTag::Interface
                } else {
                    NodeTag::Interior
                };
                tags.push(tag);
            }
        }

        let mut elements = Vec::with_capacity(nx * (n1 + n2));
        for i in 0..nx {
            for j in 0..n1 + n2 {
                let layer = if j < n1 { Layer::Lower } else { Layer::Upper };
                let active = layer == Layer::Upper || !(collapsed[i] && collapsed[i + 1]);
                let base = i * rows + j;
                elements.push(QuadElement {
                    nodes: [base, base + rows, base + rows + 1, base + 1],
                    layer,
                    sigma: params.sigma(layer),
                    active,
                });
            }
        }

        Ok(LayeredMesh {
            params,
            nx,
            n1,
            n2,
            lateral,
            x: profile.x().to_vec(),
            z,
            tags,
            collapsed,
            elements,
            profile_digest: profile.digest(),
        })
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn lateral(&self) -> LateralBoundary {
        self.lateral
    }

    pub fn rows(&self) -> usize {
        self.n1 + self.n2 + 1
    }

    pub fn node_count(&self) -> usize {
        self.z.len()
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        i * self.rows() + j
    }

    /// `(i, j)` of a node index.
    pub fn node_ij(&self, node: usize) -> (usize, usize) {
        (node / self.rows(), node % self.rows())
    }

    pub fn coords(&self, node: usize) -> (f64, f64) {
        (self.x[node / self.rows()], self.z[node])
    }

    pub fn column_x(&self) -> &[f64] {
        &self.x
    }

    pub fn tag(&self, node: usize) -> NodeTag {
        self.tags[node]
    }

    pub fn is_dirichlet(&self, node: usize) -> bool {
        match self.tags[node] {
            NodeTag::Bottom | NodeTag::Top => true,
            NodeTag::Side => self.lateral == LateralBoundary::Dirichlet,
            NodeTag::Interior | NodeTag::Interface => false,
        }
    }

    /// Layer a node belongs to; interface nodes report the lower layer.
    pub fn node_layer(&self, node: usize) -> Layer {
        if node % self.rows() <= self.n1 {
            Layer::Lower
        } else {
            Layer::Upper
        }
    }

    pub fn collapsed(&self) -> &[bool] {
        &self.collapsed
    }

    /// Interface height `u(x_i)` at column `i`.
    pub fn interface_height(&self, i: usize) -> f64 {
        self.z[self.node(i, self.n1)]
    }

    /// Slope of the piecewise-linear interface on `[x_i, x_{i+1}]`.
    pub fn interface_slope(&self, i: usize) -> f64 {
        (self.interface_height(i + 1) - self.interface_height(i)) / (self.x[i + 1] - self.x[i])
    }

    pub fn elements(&self) -> &[QuadElement] {
        &self.elements
    }

    /// Element in column `i`, cell row `j` (`j < N1` is the lower layer).
    pub fn element_index(&self, i: usize, j: usize) -> usize {
        i * (self.n1 + self.n2) + j
    }

    pub fn element_column(&self, element: usize) -> usize {
        element / (self.n1 + self.n2)
    }

    pub fn profile_digest(&self) -> u64 {
        self.profile_digest
    }

    /// Identifies the discretization: resolution, lateral condition and profile.
    pub fn signature(&self) -> String {
        format!(
            "nx={};n1={};n2={};lateral={:?};profile={:016x}",
            self.nx, self.n1, self.n2, self.lateral, self.profile_digest
        )
    }

    /// Whether a node is a vertex of at least one active element.
    pub fn node_active(&self, node: usize) -> bool {
        let (i, j) = self.node_ij(node);
        if j > self.n1 || !self.collapsed[i] {
            return true;
        }
        // lower nodes of a collapsed column only touch lower cells
        let left = i > 0 && !self.collapsed[i - 1];
        let right = i < self.nx && !self.collapsed[i + 1];
        left || right || j == self.n1
    }

    pub fn quadrature(&self, element: usize) -> Result<[QuadPoint; 4]> {
        element_quadrature(&self.elements[element], element, self)
    }

    pub fn element_area(&self, element: usize) -> Result<f64> {
        Ok(self.quadrature(element)?.iter().map(|q| q.jxw).sum())
    }
}

/// One Gauss point of an element, in physical coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadPoint {
    pub point: (f64, f64),
    /// Gauss weight times `|det J|`.
    pub jxw: f64,
    /// `J^{-T}`, mapping reference gradients to physical gradients.
    pub grad_map: [[f64; 2]; 2],
    pub shape: [f64; 4],
    /// Physical gradients of the four shape functions.
    pub shape_grad: [[f64; 2]; 4],
}

const REF_NODES: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

/// Evaluates the bilinear isoparametric map at reference point `(xi, eta) ∈ [−1, 1]²`.
/// The returned `jxw` is `|det J|` (unit weight).
pub fn eval_reference(mesh: &LayeredMesh, elem: &QuadElement, element: usize, xi: f64, eta: f64) -> Result<QuadPoint> {
    let mut shape = [0.0; 4];
    let mut dref = [[0.0; 2]; 4];
    for (a, &(xa, ya)) in REF_NODES.iter().enumerate() {
        shape[a] = 0.25 * (1.0 + xi * xa) * (1.0 + eta * ya);
        dref[a] = [0.25 * xa * (1.0 + eta * ya), 0.25 * ya * (1.0 + xi * xa)];
    }
    let mut jac = [[0.0; 2]; 2];
    let mut point = (0.0, 0.0);
    for a in 0..4 {
        let (px, pz) = mesh.coords(elem.nodes[a]);
        point.0 += shape[a] * px;
        point.1 += shape[a] * pz;
        jac[0][0] += dref[a][0] * px;
        jac[0][1] += dref[a][1] * px;
        jac[1][0] += dref[a][0] * pz;
        jac[1][1] += dref[a][1] * pz;
    }
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    if !(det > 0.0) {
        return Err(Error::DegenerateElement { element, det });
    }
    // J^{-T}
    let grad_map = [[jac[1][1] / det, -jac[1][0] / det], [-jac[0][1] / det, jac[0][0] / det]];
    let mut shape_grad = [[0.0; 2]; 4];
    for a in 0..4 {
        shape_grad[a] = [
            grad_map[0][0] * dref[a][0] + grad_map[0][1] * dref[a][1],
            grad_map[1][0] * dref[a][0] + grad_map[1][1] * dref[a][1],
        ];
    }
    Ok(QuadPoint { point, jxw: det, grad_map, shape, shape_grad })
}

/// 2×2 Gauss rule on an element.
pub fn element_quadrature(elem: &QuadElement, element: usize, mesh: &LayeredMesh) -> Result<[QuadPoint; 4]> {
    let g = 1.0 / 3.0_f64.sqrt();
    let pts = [(-g, -g), (g, -g), (g, g), (-g, g)];
    let mut out = [eval_reference(mesh, elem, element, pts[0].0, pts[0].1)?; 4];
    for (k, &(xi, eta)) in pts.iter().enumerate().skip(1) {
        out[k] = eval_reference(mesh, elem, element, xi, eta)?;
    }
    Ok(out)
}

/// Nodal values pulled back to the rectangles `R₁ = D × (0, 1)` and
/// `R₂ = D × (1, 1 + d)` through `T₁` and `T₂`.
///
/// With equispaced rows per layer this is a pure reindexing: `lower[i][j]` sits at
/// `η = j/N1` and `upper[i][k]` at `η = 1 + k·d/N2`.
#[derive(Clone, Debug, PartialEq)]
pub struct RectangleGrids {
    pub nx: usize,
    pub n1: usize,
    pub n2: usize,
    pub dx: f64,
    pub d_eta_lower: f64,
    pub d_eta_upper: f64,
    /// `(nx+1) × (n1+1)`, column-major in `i`.
    pub lower: Vec<f64>,
    /// `(nx+1) × (n2+1)`.
    pub upper: Vec<f64>,
    /// Columns where `T₁` is singular; their `lower` entries are NaN.
    pub masked: Vec<bool>,
}

impl RectangleGrids {
    pub fn lower_at(&self, i: usize, j: usize) -> f64 {
        self.lower[i * (self.n1 + 1) + j]
    }

    pub fn upper_at(&self, i: usize, k: usize) -> f64 {
        self.upper[i * (self.n2 + 1) + k]
    }
}

pub fn transform_field_to_rectangles(values: &[f64], mesh: &LayeredMesh) -> RectangleGrids {
    let (nx, n1, n2) = (mesh.nx, mesh.n1, mesh.n2);
    let mut lower = Vec::with_capacity((nx + 1) * (n1 + 1));
    let mut upper = Vec::with_capacity((nx + 1) * (n2 + 1));
    for i in 0..=nx {
        for j in 0..=n1 {
            lower.push(if mesh.collapsed[i] { f64::NAN } else { values[mesh.node(i, j)] });
        }
        for k in 0..=n2 {
            upper.push(values[mesh.node(i, n1 + k)]);
        }
    }
    RectangleGrids {
        nx,
        n1,
        n2,
        dx: 2.0 * mesh.params.half_width / nx as f64,
        d_eta_lower: 1.0 / n1 as f64,
        d_eta_upper: mesh.params.thickness / n2 as f64,
        lower,
        upper,
        masked: mesh.collapsed.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain_summary, BuiltinProfile};
    use approx::assert_relative_eq;

    fn flat(nx: usize) -> Profile {
        BuiltinProfile::Flat.sample(PhysicalParams::case_flat(), nx).unwrap()
    }

    #[test]
    fn flat_three_by_three() {
        let m = LayeredMesh::build(&flat(2), MeshSpec::new(1, 1)).unwrap();
        assert_eq!(m.node_count(), 9);
        for i in 0..3 {
            for j in 0..3 {
                let (x, z) = m.coords(m.node(i, j));
                assert_eq!((x, z), (-1.0 + i as f64, -1.0 + j as f64));
            }
        }
        assert_eq!(m.tag(m.node(1, 1)), NodeTag::Interface);
        assert_eq!(m.tag(m.node(0, 1)), NodeTag::Side);
        assert_eq!(m.tag(m.node(1, 0)), NodeTag::Bottom);
        assert_eq!(m.tag(m.node(1, 2)), NodeTag::Top);
        assert_eq!((0..9).filter(|&n| !m.is_dirichlet(n)).count(), 1);
    }

    #[test]
    fn touching_column_collapses() {
        let p = BuiltinProfile::ParabolaTouch.sample(PhysicalParams::case_flat(), 16).unwrap();
        let m = LayeredMesh::build(&p, MeshSpec::new(4, 4)).unwrap();
        assert!(m.collapsed()[8]);
        assert_eq!(m.collapsed().iter().filter(|&&c| c).count(), 1);
        for j in 0..=4 {
            assert_eq!(m.coords(m.node(8, j)).1, -1.0);
            assert_eq!(m.tag(m.node(8, j)), NodeTag::Bottom);
        }
        // adjacent cells are degenerate triangles but keep positive Jacobians
        assert!(m.elements().iter().all(|e| e.active));
        for e in 0..m.elements().len() {
            m.quadrature(e).unwrap();
        }
    }

    #[test]
    fn cosine_has_no_collapse_and_half_unit_lower_thickness() {
        let p = BuiltinProfile::Cosine { amplitude: -0.5 }.sample(PhysicalParams::case_flat(), 32).unwrap();
        let m = LayeredMesh::build(&p, MeshSpec::new(8, 8)).unwrap();
        assert!(m.collapsed().iter().all(|c| !c));
        let min = (0..=32).map(|i| m.interface_height(i) + 1.0).fold(f64::INFINITY, f64::min);
        assert_relative_eq!(min, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn rejects_empty_layers() {
        assert!(LayeredMesh::build(&flat(4), MeshSpec::new(0, 2)).is_err());
        assert!(LayeredMesh::build(&flat(4), MeshSpec::new(2, 0)).is_err());
    }

    #[test]
    fn flat_band_cells_between_collapsed_columns_are_inactive() {
        let params = PhysicalParams::case_flat();
        let mut u = vec![0.0; 9];
        for v in u.iter_mut().take(6).skip(3) {
            *v = -1.0;
        }
        u[2] = -0.5;
        u[6] = -0.5;
        let p = Profile::from_samples(params, u).unwrap();
        let m = LayeredMesh::build(&p, MeshSpec::new(3, 2)).unwrap();
        let inactive: Vec<_> = (0..m.elements().len()).filter(|&e| !m.elements()[e].active).collect();
        // columns 3-4 and 4-5, all three lower cells each
        assert_eq!(inactive.len(), 6);
        for e in inactive {
            assert_eq!(m.elements()[e].layer, Layer::Lower);
        }
    }

    #[test]
    fn unit_square_quadrature() {
        let m = LayeredMesh::build(&flat(2), MeshSpec::new(1, 1)).unwrap();
        let q = m.quadrature(0).unwrap();
        for p in &q {
            assert_relative_eq!(p.jxw, 0.25, epsilon = 1e-15);
            assert_relative_eq!(p.grad_map[0][0], 2.0, epsilon = 1e-15);
            assert_relative_eq!(p.grad_map[1][1], 2.0, epsilon = 1e-15);
            assert_eq!(p.grad_map[0][1], 0.0);
        }
    }

    #[test]
    fn two_by_one_rectangle_quadrature() {
        let params = PhysicalParams::new(2.0, 1.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        let p = BuiltinProfile::Flat.sample(params, 2).unwrap();
        let m = LayeredMesh::build(&p, MeshSpec::new(1, 1)).unwrap();
        let q = m.quadrature(0).unwrap();
        let area: f64 = q.iter().map(|p| p.jxw).sum();
        assert_relative_eq!(area, 2.0, epsilon = 1e-14);
        for p in &q {
            assert_relative_eq!(p.jxw, 0.5, epsilon = 1e-15);
            // linear function 3x + 5z is reproduced exactly
            let vals: Vec<f64> = m.elements()[0].nodes.iter().map(|&n| {
                let (x, z) = m.coords(n);
                3.0 * x + 5.0 * z
            }).collect();
            let g = (0..4).fold([0.0, 0.0], |acc, a| [acc[0] + vals[a] * p.shape_grad[a][0], acc[1] + vals[a] * p.shape_grad[a][1]]);
            assert_relative_eq!(g[0], 3.0, epsilon = 1e-13);
            assert_relative_eq!(g[1], 5.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn sheared_upper_cell_area_matches_shoelace() {
        let params = PhysicalParams::case_flat();
        // u = 0.1 x sampled on a 4-interval grid, shifted to vanish at ±L by a zero-sum trick:
        // use the tent 0.1(1 − |x|) which is linear on each half
        let p = Profile::from_fn(params, 4, |x| 0.1 * (1.0 - x.abs())).unwrap();
        let m = LayeredMesh::build(&p, MeshSpec::new(2, 3)).unwrap();
        for e in 0..m.elements().len() {
            let nodes = m.elements()[e].nodes;
            let pts: Vec<(f64, f64)> = nodes.iter().map(|&n| m.coords(n)).collect();
            let shoelace = 0.5
                * (0..4)
                    .map(|a| {
                        let (x0, z0) = pts[a];
                        let (x1, z1) = pts[(a + 1) % 4];
                        x0 * z1 - x1 * z0
                    })
                    .sum::<f64>();
            assert_relative_eq!(m.element_area(e).unwrap(), shoelace, max_relative = 1e-13);
        }
    }

    #[test]
    fn active_area_matches_domain_summary() {
        for profile in [
            BuiltinProfile::Flat,
            BuiltinProfile::Cosine { amplitude: -0.5 },
            BuiltinProfile::ParabolaTouch,
        ] {
            let p = profile.sample(PhysicalParams::case_flat(), 64).unwrap();
            let m = LayeredMesh::build(&p, MeshSpec::new(8, 8)).unwrap();
            let area: f64 = (0..m.elements().len())
                .filter(|&e| m.elements()[e].active)
                .map(|e| m.element_area(e).unwrap())
                .sum();
            let s = build_domain_summary(&p);
            assert_relative_eq!(area, s.area_lower + s.area_upper, max_relative = 1e-10);
        }
    }

    #[test]
    fn linear_patch_test() {
        let p = BuiltinProfile::Cosine { amplitude: -0.4 }.sample(PhysicalParams::case_flat(), 12).unwrap();
        let m = LayeredMesh::build(&p, MeshSpec::new(3, 5)).unwrap();
        let f = |x: f64, z: f64| 0.3 - 1.7 * x + 2.2 * z;
        let vals: Vec<f64> = (0..m.node_count()).map(|n| {
            let (x, z) = m.coords(n);
            f(x, z)
        }).collect();
        for (e, elem) in m.elements().iter().enumerate() {
            for q in m.quadrature(e).unwrap() {
                let v: f64 = (0..4).map(|a| q.shape[a] * vals[elem.nodes[a]]).sum();
                assert!((v - f(q.point.0, q.point.1)).abs() < 1e-12);
                let gx: f64 = (0..4).map(|a| q.shape_grad[a][0] * vals[elem.nodes[a]]).sum();
                let gz: f64 = (0..4).map(|a| q.shape_grad[a][1] * vals[elem.nodes[a]]).sum();
                assert!((gx + 1.7).abs() < 1e-12 && (gz - 2.2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interface_row_is_shared() {
        let p = BuiltinProfile::Cosine { amplitude: -0.5 }.sample(PhysicalParams::case_flat(), 10).unwrap();
        let m = LayeredMesh::build(&p, MeshSpec::new(3, 2)).unwrap();
        assert_eq!(m.node_count(), 11 * 6);
        for i in 0..=10 {
            assert_eq!(m.interface_height(i), p.u()[i]);
            // the top node of the lower cell and the bottom node of the upper cell coincide
            let below = m.elements()[m.element_index(i.min(9), 2)].nodes[3];
            let above = m.elements()[m.element_index(i.min(9), 3)].nodes[0];
            assert_eq!(below, above);
        }
    }

    #[test]
    fn rectangles_reindex_nodal_values() {
        let p = BuiltinProfile::Cosine { amplitude: -0.5 }.sample(PhysicalParams::case_flat(), 16).unwrap();
        let m = LayeredMesh::build(&p, MeshSpec::new(4, 4)).unwrap();
        let vals: Vec<f64> = (0..m.node_count()).map(|n| m.coords(n).1 + 1.0).collect();
        let r = transform_field_to_rectangles(&vals, &m);
        for i in 0..=16 {
            let g = p.u()[i] + 1.0;
            for j in 0..=4 {
                let eta = j as f64 / 4.0;
                assert_relative_eq!(r.lower_at(i, j), eta * g, epsilon = 1e-14);
            }
            assert_eq!(r.lower_at(i, 4), r.upper_at(i, 0));
        }
    }
}
