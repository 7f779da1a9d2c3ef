//! Linear finite elements on active meshes: scalar diffusion with
//! Robin/Dirichlet/Neumann data and plane-stress elasticity.

mod elasticity;
mod poisson;
mod system;

pub use elasticity::{assemble_elasticity, assemble_elasticity_unconstrained, ElasticBc, ElasticityProblem};
pub use poisson::{assemble_poisson, assemble_poisson_unconstrained, PoissonBc, PoissonProblem};
pub use system::AssembledSystem;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use crate::mesh::{adapt_to_boundary, AdaptedMesh, BackgroundGrid, Curve, Geometry};
    use std::collections::BTreeMap;

    fn rect_mesh(w: f64, h: f64, nx: usize, ny: usize, tags: Vec<u32>) -> AdaptedMesh {
        let grid = BackgroundGrid::new([0.0, 0.0, w, h], nx, ny).unwrap();
        let outer = Curve::new(vec![[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]], tags).unwrap();
        adapt_to_boundary(&grid, &Geometry::new(outer, vec![])).unwrap()
    }

    fn poisson(bc: PoissonBc, source: f64) -> PoissonProblem {
        PoissonProblem {
            conductivity: 1.0,
            source,
            boundary: BTreeMap::from([(0, bc)]),
        }
    }

    #[test]
    fn neumann_kernel_contains_constants() {
        let m = rect_mesh(1.0, 1.0, 9, 9, vec![]);
        let s = assemble_poisson(&m, &poisson(PoissonBc::Neumann { flux: 0.0 }, 0.0)).unwrap();
        let y = s.k.spmv(&vec![1.0; s.n()]).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn interior_row_is_five_point_stencil() {
        let m = rect_mesh(1.0, 1.0, 6, 6, vec![]);
        let s = assemble_poisson(&m, &poisson(PoissonBc::Neumann { flux: 0.0 }, 0.0)).unwrap();
        let id = m.grid.node_id(2, 3);
        let r = m.active_index[id].unwrap();
        let at = |ix: usize, iy: usize| s.k.get(r, m.active_index[m.grid.node_id(ix, iy)].unwrap());
        assert!((at(2, 3) - 4.0).abs() < 1e-14);
        for (ix, iy) in [(1, 3), (3, 3), (2, 2), (2, 4)] {
            assert!((at(ix, iy) + 1.0).abs() < 1e-14);
        }
        assert!(at(1, 2).abs() < 1e-14 && at(3, 4).abs() < 1e-14);
        assert_eq!(s.k.row(r).0.len(), 7);
    }

    /// Series solution of -Δu = 1 on the unit square at its center.
    fn series_center() -> f64 {
        let pi = std::f64::consts::PI;
        let mut s = 0.0;
        for m in (1..400).step_by(2) {
            for n in (1..400).step_by(2) {
                let sign = if ((m + n) / 2) % 2 == 1 { 1.0 } else { -1.0 };
                let (mf, nf) = (m as f64, n as f64);
                s += sign * 16.0 / (pi.powi(4) * mf * nf * (mf * mf + nf * nf));
            }
        }
        s
    }

    fn dense_solve(s: &AssembledSystem) -> Vec<f64> {
        crate::linalg::dense::lu_solve(&s.k.to_dense(), &s.f).unwrap()
    }

    #[test]
    fn unit_square_center_matches_series() {
        let oracle = series_center();
        assert!((oracle - 0.0737).abs() < 1e-4);
        let mut errs = Vec::new();
        for n in [9, 17] {
            let m = rect_mesh(1.0, 1.0, n, n, vec![]);
            let s = assemble_poisson(&m, &poisson(PoissonBc::Dirichlet { value: 0.0 }, 1.0)).unwrap();
            let u = dense_solve(&s);
            let c = m.active_index[m.grid.node_id(n / 2, n / 2)].unwrap();
            errs.push((u[c] - oracle).abs());
        }
        assert!(errs[1] < errs[0] && errs[1] < 2e-3, "{errs:?}");
    }

    #[test]
    fn robin_adds_edge_mass() {
        let m = rect_mesh(1.0, 1.0, 3, 3, vec![]);
        let neu = assemble_poisson(&m, &poisson(PoissonBc::Neumann { flux: 0.0 }, 0.0)).unwrap();
        let rob = assemble_poisson(&m, &poisson(PoissonBc::Robin { alpha: 2.0, ambient: 3.0 }, 0.0)).unwrap();
        // K·1 of the Robin system is α times the boundary-length lumped mass;
        // total = α·perimeter; load total = α·g·perimeter.
        let ones = vec![1.0; rob.n()];
        let total: f64 = rob.k.spmv(&ones).unwrap().iter().sum();
        assert!((total - 8.0).abs() < 1e-13);
        assert!((rob.f.iter().sum::<f64>() - 24.0).abs() < 1e-13);
        assert!(neu.k.get(0, 0) < rob.k.get(0, 0));
    }

    #[test]
    fn untagged_boundary_is_an_error() {
        let m = rect_mesh(1.0, 1.0, 3, 3, vec![5]);
        assert!(assemble_poisson(&m, &poisson(PoissonBc::Neumann { flux: 0.0 }, 0.0)).is_err());
    }

    fn elastic(boundary: BTreeMap<u32, ElasticBc>, nu: f64) -> ElasticityProblem {
        ElasticityProblem {
            youngs_modulus: 300.0,
            poisson_ratio: nu,
            thickness: 1.0,
            boundary,
        }
    }

    #[test]
    fn rigid_translation_in_kernel() {
        let m = rect_mesh(2.0, 1.0, 9, 5, vec![]);
        let p = elastic(BTreeMap::from([(0, ElasticBc::Free)]), 0.22);
        let (k, _) = assemble_elasticity_unconstrained(&m, &p).unwrap();
        let norm = k.frobenius_norm();
        for comp in 0..2 {
            let t: Vec<f64> = (0..k.n()).map(|i| (i % 2 == comp) as u8 as f64).collect();
            let y = k.spmv(&t).unwrap();
            assert!(y.iter().all(|v| v.abs() < 1e-12 * norm));
        }
        assert!(matches!(assemble_elasticity(&m, &p), Err(crate::Error::NoClampedDofs)));
    }

    #[test]
    fn patch_test_reproduces_linear_field() {
        let m = rect_mesh(1.0, 1.0, 7, 7, vec![]);
        let a = [0.01, -0.02];
        let mm = [[0.003, 0.001], [-0.002, 0.004]];
        let p = elastic(BTreeMap::from([(0, ElasticBc::Prescribed { a, m: mm })]), 0.3);
        let s = assemble_elasticity(&m, &p).unwrap();
        let u = dense_solve(&s);
        for (r, &id) in m.active_nodes.iter().enumerate() {
            let x = m.positions[id];
            assert!((u[2 * r] - (a[0] + mm[0][0] * x[0] + mm[0][1] * x[1])).abs() < 1e-10);
            assert!((u[2 * r + 1] - (a[1] + mm[1][0] * x[0] + mm[1][1] * x[1])).abs() < 1e-10);
        }
    }

    #[test]
    fn uniaxial_bar_matches_bar_theory() {
        // Tags: bottom 0, right 1, top 2, left 3.
        let m = rect_mesh(4.0, 1.0, 41, 11, vec![0, 1, 2, 3]);
        let t = 2.0;
        let p = elastic(
            BTreeMap::from([
                (0, ElasticBc::Free),
                (1, ElasticBc::Traction { tx: t, ty: 0.0 }),
                (2, ElasticBc::Free),
                (3, ElasticBc::Clamped),
            ]),
            0.22,
        );
        let s = assemble_elasticity(&m, &p).unwrap();
        let u = dense_solve(&s);
        let r = m.active_index[m.grid.node_id(40, 5)].unwrap();
        let expected = t * 4.0 / 300.0;
        assert!((u[2 * r] - expected).abs() < 0.05 * expected, "{} vs {expected}", u[2 * r]);
    }

    #[test]
    fn energy_positive_after_elimination() {
        let m = rect_mesh(1.0, 1.0, 6, 6, vec![]);
        let s = assemble_poisson(&m, &poisson(PoissonBc::Robin { alpha: 1.0, ambient: 0.0 }, 0.0)).unwrap();
        let mut x = 0.3f64;
        for _ in 0..100 {
            let u: Vec<f64> = (0..s.n())
                .map(|_| {
                    x = (x * 3.7 + 0.11).fract();
                    x - 0.5
                })
                .collect();
            assert!(dot(&u, &s.k.spmv(&u).unwrap()) > 0.0);
        }
    }
}
