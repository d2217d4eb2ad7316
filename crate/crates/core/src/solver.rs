//! Discrete variational problem for `χ = ψ − h`.
//!
//! With `V_h` the bilinear space vanishing on the Dirichlet nodes, `χ_h ∈ V_h`
//! solves `a(χ_h, θ) = −∫σ∇h·∇θ` for all `θ ∈ V_h`, with `∇h` evaluated in closed
//! form at the Gauss points. Then `ψ = χ + h` nodewise.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::boundary::Lift;
use crate::diagnostics::flux_jump_residual;
use crate::error::Result;
use crate::geometry::{Layer, Profile};
use crate::mesh::{LayeredMesh, MeshSpec, NodeTag};
use crate::sparse::{pcg, CsrMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Chi,
    H,
    Psi,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub profile_digest: u64,
    pub mesh_signature: String,
}

/// Nodal values on a [`LayeredMesh`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub kind: FieldKind,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl Field {
    pub fn new(kind: FieldKind, values: Vec<f64>, mesh: &LayeredMesh) -> Self {
        Field {
            kind,
            values,
            provenance: Provenance { profile_digest: mesh.profile_digest(), mesh_signature: mesh.signature() },
        }
    }

    /// Samples `f(x, z)` at the mesh nodes.
    pub fn interpolate(kind: FieldKind, mesh: &LayeredMesh, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..mesh.node_count())
            .map(|n| {
                let (x, z) = mesh.coords(n);
                f(x, z)
            })
            .collect();
        Field::new(kind, values, mesh)
    }

    /// Values of the nodes belonging to one layer, in `(i, j)` order.
    pub fn layer_values(&self, mesh: &LayeredMesh, layer: Layer) -> Vec<f64> {
        let range = match layer {
            Layer::Lower => 0..=mesh.n1(),
            Layer::Upper => mesh.n1()..=mesh.n1() + mesh.n2(),
        };
        (0..=mesh.nx())
            .flat_map(|i| range.clone().map(move |j| (i, j)))
            .map(|(i, j)| self.values[mesh.node(i, j)])
            .collect()
    }
}

/// The reduced system over the free (non-Dirichlet) nodes.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub free_nodes: Vec<usize>,
    pub free_index: Vec<Option<usize>>,
}

impl SparseSystem {
    pub fn to_nodal(&self, free_values: &[f64], node_count: usize) -> Vec<f64> {
        let mut out = vec![0.0; node_count];
        for (k, &n) in self.free_nodes.iter().enumerate() {
            out[n] = free_values[k];
        }
        out
    }

    pub fn to_free(&self, nodal: &[f64]) -> Vec<f64> {
        self.free_nodes.iter().map(|&n| nodal[n]).collect()
    }
}

fn element_stiffness(mesh: &LayeredMesh, element: usize) -> Result<[[f64; 4]; 4]> {
    let sigma = mesh.elements()[element].sigma;
    let mut k = [[0.0; 4]; 4];
    for q in mesh.quadrature(element)? {
        for a in 0..4 {
            for b in 0..4 {
                let g = q.shape_grad[a][0] * q.shape_grad[b][0] + q.shape_grad[a][1] * q.shape_grad[b][1];
                k[a][b] += sigma * q.jxw * g;
            }
        }
    }
    Ok(k)
}

/// Stiffness matrix over all nodes (Dirichlet ones included).
pub fn assemble_stiffness(mesh: &LayeredMesh) -> Result<CsrMatrix> {
    let mut triplets = Vec::with_capacity(16 * mesh.elements().len());
    for (e, elem) in mesh.elements().iter().enumerate() {
        if !elem.active {
            continue;
        }
        let k = element_stiffness(mesh, e)?;
        for a in 0..4 {
            for b in 0..4 {
                triplets.push((elem.nodes[a], elem.nodes[b], k[a][b]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.node_count(), triplets))
}

/// `∫_e σ∇h·∇φ_a` for the four vertices of an upper element.
fn element_lift_load(mesh: &LayeredMesh, lift: &Lift, element: usize) -> Result<[f64; 4]> {
    let elem = &mesh.elements()[element];
    let i = mesh.element_column(element);
    let (x0, u0) = (mesh.column_x()[i], mesh.interface_height(i));
    let slope = mesh.interface_slope(i);
    let mut out = [0.0; 4];
    for q in mesh.quadrature(element)? {
        let (x, z) = q.point;
        let g = lift.eval_local(u0 + slope * (x - x0), slope, z);
        for a in 0..4 {
            out[a] += elem.sigma * q.jxw * (g.dx * q.shape_grad[a][0] + g.dz * q.shape_grad[a][1]);
        }
    }
    Ok(out)
}

pub fn assemble(mesh: &LayeredMesh, lift: &Lift) -> Result<SparseSystem> {
    let mut free_index = vec![None; mesh.node_count()];
    let mut free_nodes = Vec::new();
    for n in 0..mesh.node_count() {
        if !mesh.is_dirichlet(n) {
            free_index[n] = Some(free_nodes.len());
            free_nodes.push(n);
        }
    }
    let mut triplets = Vec::with_capacity(16 * mesh.elements().len());
    let mut rhs = vec![0.0; free_nodes.len()];
    for (e, elem) in mesh.elements().iter().enumerate() {
        if !elem.active {
            continue;
        }
        let k = element_stiffness(mesh, e)?;
        for a in 0..4 {
            let Some(ra) = free_index[elem.nodes[a]] else { continue };
            for b in 0..4 {
                if let Some(rb) = free_index[elem.nodes[b]] {
                    triplets.push((ra, rb, k[a][b]));
                }
            }
        }
        // h ≡ 0 on the lower layer
        if elem.layer == Layer::Upper {
            let load = element_lift_load(mesh, lift, e)?;
            for a in 0..4 {
                if let Some(ra) = free_index[elem.nodes[a]] {
                    rhs[ra] -= load[a];
                }
            }
        }
    }
    Ok(SparseSystem { matrix: CsrMatrix::from_triplets(free_nodes.len(), triplets), rhs, free_nodes, free_index })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    pub cg_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { cg_tol: 1e-10, max_iter: 100_000 }
    }
}

pub struct CgSolve {
    pub chi: Field,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves the reduced system and scatters `χ` back to all nodes (zero on Dirichlet nodes).
pub fn solve_cg(
    system: &SparseSystem,
    mesh: &LayeredMesh,
    settings: &SolverSettings,
    initial: Option<&[f64]>,
) -> Result<CgSolve> {
    let x0 = initial.map(|nodal| system.to_free(nodal));
    let out = pcg(&system.matrix, &system.rhs, x0.as_deref(), settings.cg_tol, settings.max_iter)?;
    Ok(CgSolve {
        chi: Field::new(FieldKind::Chi, system.to_nodal(&out.solution, mesh.node_count()), mesh),
        iterations: out.iterations,
        relative_residual: out.relative_residual,
    })
}

/// Nodal values of `h`. Lower-layer nodes are exactly 0 and top nodes exactly `V`;
/// plate nodes use `r = 1 + k·d/N2` so the lift sees the same layer coordinate as
/// the transformed grids.
pub fn lift_field(mesh: &LayeredMesh, lift: &Lift) -> Field {
    let n1 = mesh.n1();
    let n2 = mesh.n2();
    let values = (0..mesh.node_count())
        .map(|n| {
            let (_, j) = mesh.node_ij(n);
            if j <= n1 {
                0.0
            } else if mesh.tag(n) == NodeTag::Top {
                lift.voltage
            } else {
                let r = 1.0 + lift.thickness * (j - n1) as f64 / n2 as f64;
                lift.eval_zeta(r).value
            }
        })
        .collect();
    Field::new(FieldKind::H, values, mesh)
}

pub fn reconstruct_psi(chi: &Field, h: &Field, mesh: &LayeredMesh) -> Field {
    let values = (0..mesh.node_count())
        .map(|n| match mesh.tag(n) {
            NodeTag::Top => h.values[n],
            NodeTag::Bottom => 0.0,
            _ => chi.values[n] + h.values[n],
        })
        .collect();
    Field::new(FieldKind::Psi, values, mesh)
}

/// `½∫σ|∇θ_h|²` over the active elements, `θ_h` the bilinear interpolant.
pub fn dirichlet_energy(values: &[f64], mesh: &LayeredMesh) -> Result<f64> {
    let mut total = 0.0;
    for (e, elem) in mesh.elements().iter().enumerate() {
        if !elem.active {
            continue;
        }
        for q in mesh.quadrature(e)? {
            let (gx, gz) = interpolant_gradient(&q, elem.nodes, values);
            total += 0.5 * elem.sigma * q.jxw * (gx * gx + gz * gz);
        }
    }
    Ok(total)
}

/// `(‖θ_h‖²_{L²}, ‖∂_xθ_h‖², ‖∂_zθ_h‖²)` over the active elements.
pub fn l2_parts(values: &[f64], mesh: &LayeredMesh) -> Result<(f64, f64, f64)> {
    let (mut v2, mut x2, mut z2) = (0.0, 0.0, 0.0);
    for (e, elem) in mesh.elements().iter().enumerate() {
        if !elem.active {
            continue;
        }
        for q in mesh.quadrature(e)? {
            let v: f64 = (0..4).map(|a| q.shape[a] * values[elem.nodes[a]]).sum();
            let (gx, gz) = interpolant_gradient(&q, elem.nodes, values);
            v2 += q.jxw * v * v;
            x2 += q.jxw * gx * gx;
            z2 += q.jxw * gz * gz;
        }
    }
    Ok((v2, x2, z2))
}

pub(crate) fn interpolant_gradient(q: &crate::mesh::QuadPoint, nodes: [usize; 4], values: &[f64]) -> (f64, f64) {
    (0..4).fold((0.0, 0.0), |(gx, gz), a| {
        let v = values[nodes[a]];
        (gx + v * q.shape_grad[a][0], gz + v * q.shape_grad[a][1])
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub energy_psi: f64,
    pub energy_h: f64,
    pub cg_iters: usize,
    pub cg_residual: f64,
    pub flux_jump_l2: f64,
    pub h1_norm_chi: f64,
    pub free_dofs: usize,
    /// Seconds. Not serialized, so reports stay byte-identical across runs.
    #[serde(skip)]
    pub wall_time: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub profile: Profile,
    pub mesh: LayeredMesh,
    pub lift: Lift,
    pub chi: Field,
    pub h: Field,
    pub psi: Field,
    pub report: SolveReport,
}

pub fn solve(profile: &Profile, spec: MeshSpec, settings: &SolverSettings) -> Result<Solution> {
    solve_from(profile, spec, settings, None)
}

/// Like [`solve`], starting CG from the given nodal `χ` guess.
pub fn solve_from(profile: &Profile, spec: MeshSpec, settings: &SolverSettings, initial: Option<&[f64]>) -> Result<Solution> {
    let start = Instant::now();
    let mesh = LayeredMesh::build(profile, spec)?;
    let lift = Lift::new(profile.params());
    let system = assemble(&mesh, &lift)?;
    let cg = solve_cg(&system, &mesh, settings, initial)?;
    let h = lift_field(&mesh, &lift);
    let psi = reconstruct_psi(&cg.chi, &h, &mesh);
    let energy_psi = dirichlet_energy(&psi.values, &mesh)?;
    let energy_h = dirichlet_energy(&h.values, &mesh)?;
    let (c2, cx, cz) = l2_parts(&cg.chi.values, &mesh)?;
    let flux = flux_jump_residual(&psi, &mesh)?;
    let report = SolveReport {
        energy_psi,
        energy_h,
        cg_iters: cg.iterations,
        cg_residual: cg.relative_residual,
        flux_jump_l2: flux.l2,
        h1_norm_chi: (c2 + cx + cz).sqrt(),
        free_dofs: system.free_nodes.len(),
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok(Solution { profile: profile.clone(), mesh, lift, chi: cg.chi, h, psi, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BuiltinProfile, PhysicalParams};
    use approx::assert_relative_eq;

    fn flat_mesh(nx: usize, n1: usize, n2: usize, params: PhysicalParams) -> LayeredMesh {
        let p = BuiltinProfile::Flat.sample(params, nx).unwrap();
        LayeredMesh::build(&p, MeshSpec::new(n1, n2)).unwrap()
    }

    #[test]
    fn unit_square_element_stiffness() {
        let params = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let m = flat_mesh(2, 1, 1, params);
        let k = element_stiffness(&m, 0).unwrap();
        // node 0 neighbours: 1 along x, 3 along z, 2 diagonal
        assert_relative_eq!(k[0][0], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(k[0][1], -1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(k[0][3], -1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(k[0][2], -1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn single_free_node_system() {
        let params = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let m = flat_mesh(2, 1, 1, params);
        let s = assemble(&m, &Lift::new(&params)).unwrap();
        assert_eq!(s.free_nodes, vec![m.node(1, 1)]);
        assert_relative_eq!(s.matrix.get(0, 0), 8.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn constants_are_in_the_kernel() {
        let p = BuiltinProfile::Cosine { amplitude: -0.5 }.sample(PhysicalParams::case_flat(), 16).unwrap();
        let m = LayeredMesh::build(&p, MeshSpec::new(4, 4)).unwrap();
        let a = assemble_stiffness(&m).unwrap();
        let ones = vec![1.0; m.node_count()];
        assert!(a.matvec(&ones).iter().all(|v| v.abs() < 1e-12));
        assert!(a.asymmetry() < 1e-13);
    }

    #[test]
    fn lift_load_lives_on_the_plate() {
        let m = flat_mesh(8, 4, 4, PhysicalParams::case_flat());
        let s = assemble(&m, &Lift::new(m.params())).unwrap();
        for (k, &n) in s.free_nodes.iter().enumerate() {
            let (_, j) = m.node_ij(n);
            if j < m.n1() {
                assert_eq!(s.rhs[k], 0.0, "node {n}");
            }
        }
        assert!(s.rhs.iter().any(|&b| b != 0.0));
    }

    #[test]
    fn reconstruction_pins_boundary_values() {
        let p = BuiltinProfile::Cosine { amplitude: -0.5 }.sample(PhysicalParams::case_flat(), 16).unwrap();
        let sol = solve(&p, MeshSpec::new(4, 4), &SolverSettings::default()).unwrap();
        for n in 0..sol.mesh.node_count() {
            match sol.mesh.tag(n) {
                NodeTag::Top => assert_eq!(sol.psi.values[n], 1.0),
                NodeTag::Bottom => assert_eq!(sol.psi.values[n], 0.0),
                _ => {}
            }
            if sol.mesh.is_dirichlet(n) {
                assert_eq!(sol.chi.values[n], 0.0);
            }
        }
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let m = flat_mesh(4, 2, 2, PhysicalParams::case_flat());
        assert_eq!(dirichlet_energy(&vec![0.0; m.node_count()], &m).unwrap(), 0.0);
    }

    #[test]
    fn lift_energy_converges_to_closed_form() {
        // ½∫σ₂|∂_z h|² = ½·σ₂·2L·∫₀^d (2Vs/d²)² ds = 4Lσ₂V²/(3d) = 8/3
        let exact = 8.0 / 3.0;
        let errs: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&n| {
                let m = flat_mesh(n, n, n, PhysicalParams::case_flat());
                let h = lift_field(&m, &Lift::new(m.params()));
                (dirichlet_energy(&h.values, &m).unwrap() - exact).abs()
            })
            .collect();
        for w in errs.windows(2) {
            assert_relative_eq!(w[0] / w[1], 4.0, max_relative = 0.05);
        }
    }
}
