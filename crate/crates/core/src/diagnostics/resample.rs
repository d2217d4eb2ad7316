use crate::mesh::LayeredMesh;

/// Uniform grid on the box `D × (−H, M)`, used to compare fields that live on
/// different domains `Ω(v_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonGrid {
    pub half_width: f64,
    pub bottom: f64,
    pub top: f64,
    pub nx: usize,
    pub nz: usize,
}

impl ComparisonGrid {
    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn dz(&self) -> f64 {
        (self.top - self.bottom) / self.nz as f64
    }

    pub fn point(&self, i: usize, k: usize) -> (f64, f64) {
        (-self.half_width + i as f64 * self.dx(), self.bottom + k as f64 * self.dz())
    }

    /// Samples the bilinear interpolant of `values`, extended by zero outside the
    /// mesh. Row-major in `i`, `(nx+1)·(nz+1)` entries.
    pub fn sample(&self, mesh: &LayeredMesh, values: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity((self.nx + 1) * (self.nz + 1));
        for i in 0..=self.nx {
            for k in 0..=self.nz {
                let (x, z) = self.point(i, k);
                out.push(evaluate(mesh, values, x, z));
            }
        }
        out
    }

    /// `‖a − b‖_{H¹}` of the Q1 interpolants on this grid (2×2 Gauss).
    pub fn h1_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let (dx, dz) = (self.dx(), self.dz());
        let nzp = self.nz + 1;
        let g = 0.5 / 3.0_f64.sqrt();
        let pts = [0.5 - g, 0.5 + g];
        let mut total = 0.0;
        for i in 0..self.nx {
            for k in 0..self.nz {
                let idx = |ii: usize, kk: usize| ii * nzp + kk;
                let d00 = a[idx(i, k)] - b[idx(i, k)];
                let d10 = a[idx(i + 1, k)] - b[idx(i + 1, k)];
                let d01 = a[idx(i, k + 1)] - b[idx(i, k + 1)];
                let d11 = a[idx(i + 1, k + 1)] - b[idx(i + 1, k + 1)];
                for &s in &pts {
                    for &t in &pts {
                        let v = (1.0 - s) * (1.0 - t) * d00 + s * (1.0 - t) * d10 + (1.0 - s) * t * d01 + s * t * d11;
                        let gx = ((1.0 - t) * (d10 - d00) + t * (d11 - d01)) / dx;
                        let gz = ((1.0 - s) * (d01 - d00) + s * (d11 - d10)) / dz;
                        total += 0.25 * dx * dz * (v * v + gx * gx + gz * gz);
                    }
                }
            }
        }
        total.sqrt()
    }

    /// `‖a − b‖_{L²}` of the Q1 interpolants (2×2 Gauss).
    pub fn l2_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let (dx, dz) = (self.dx(), self.dz());
        let nzp = self.nz + 1;
        let g = 0.5 / 3.0_f64.sqrt();
        let pts = [0.5 - g, 0.5 + g];
        let mut total = 0.0;
        for i in 0..self.nx {
            for k in 0..self.nz {
                let d = |ii: usize, kk: usize| a[ii * nzp + kk] - b[ii * nzp + kk];
                for &s in &pts {
                    for &t in &pts {
                        let v = (1.0 - s) * (1.0 - t) * d(i, k)
                            + s * (1.0 - t) * d(i + 1, k)
                            + (1.0 - s) * t * d(i, k + 1)
                            + s * t * d(i + 1, k + 1);
                        total += 0.25 * dx * dz * v * v;
                    }
                }
            }
        }
        total.sqrt()
    }
}

/// Bilinear interpolant at `(x, z)`, zero outside `Ω`. Columns are vertical, so the
/// isoparametric map inverts in closed form: `s` from `x`, then `t` from `z` on the
/// node lines of the column.
pub fn evaluate(mesh: &LayeredMesh, values: &[f64], x: f64, z: f64) -> f64 {
    let xs = mesh.column_x();
    let nx = mesh.nx();
    let dx = xs[1] - xs[0];
    let pos = ((x - xs[0]) / dx).clamp(0.0, nx as f64);
    let i = (pos.floor() as usize).min(nx - 1);
    let s = pos - i as f64;
    let rows = mesh.rows();
    let line = |j: usize| (1.0 - s) * mesh.coords(mesh.node(i, j)).1 + s * mesh.coords(mesh.node(i + 1, j)).1;
    if z < line(0) || z > line(rows - 1) {
        return 0.0;
    }
    // last row whose line lies at or below z
    let (mut lo, mut hi) = (0, rows - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if line(mid) <= z {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (z0, z1) = (line(lo), line(lo + 1));
    let t = if z1 > z0 { ((z - z0) / (z1 - z0)).clamp(0.0, 1.0) } else { 0.0 };
    let v = |ii: usize, jj: usize| values[mesh.node(ii, jj)];
    (1.0 - s) * (1.0 - t) * v(i, lo) + s * (1.0 - t) * v(i + 1, lo) + (1.0 - s) * t * v(i, lo + 1) + s * t * v(i + 1, lo + 1)
}
