use vortex_rings::diagnostics::ring_centroids;
use vortex_rings::euler::*;
use vortex_rings::fields::superpose;
use vortex_rings::grid::{AxiGrid, ScalarField};
use vortex_rings::reduced::RingFamily;
use vortex_rings::Vec2;

const EPS: f64 = 0.1;

fn grid() -> AxiGrid {
    AxiGrid::from_extents(141, 201, 3.5, -2.5, 2.5).unwrap()
}

fn ring() -> RingFamily {
    RingFamily::from_centers(vec![Vec2::new(1.0, 0.0)], EPS, 1.0).unwrap()
}

fn centers(cfg: SolverConfig) -> Vec<(f64, Vec2)> {
    let out = run(&ring(), &cfg, 0.4, 0).unwrap();
    out.centers.times.iter().zip(&out.centers.centers).map(|(t, c)| (*t, c[0])).collect()
}

/// Largest deviation between the centers in frame α₀ + δ and the α₀ centers shifted by −2δτ.
fn frame_defect(dt: f64, corrector: bool) -> f64 {
    let mut base = SolverConfig::new(EPS, 1.0, dt, 0.05, grid());
    base.predictor_corrector = corrector;
    let mut moved = base.clone();
    let delta = 0.5;
    moved.alpha0 += delta;
    let a = centers(base);
    let b = centers(moved);
    a.iter().zip(&b).fold(0.0f64, |m, ((t, p), (_, q))| {
        m.max((*p - Vec2::new(0.0, 2.0 * delta * t) - *q).norm())
    })
}

#[test]
fn frame_change_is_a_uniform_drift() {
    assert!(frame_defect(1e-3, true) < 1e-3);
}

#[test]
fn frozen_velocity_step_lags_in_the_moving_frame() {
    // without the corrector ψ trails the core by a frame-dependent u·dt
    let coarse = frame_defect(1e-3, false);
    let fine = frame_defect(5e-4, false);
    assert!(coarse > 1e-3);
    assert!(coarse / fine > 1.7 && coarse / fine < 2.3, "{coarse} {fine}");
}

#[test]
fn mirror_with_reversed_sign_and_frame_is_a_symmetry() {
    let g = AxiGrid::from_extents(141, 241, 3.5, -3.0, 3.0).unwrap();
    let base = SolverConfig::new(EPS, 1.0, 1e-3, 0.02, g);
    let mut mirrored_cfg = base.clone();
    mirrored_cfg.alpha0 = -base.alpha0;
    let fam = RingFamily::from_centers(vec![Vec2::new(1.0, 0.3)], EPS, 1.0).unwrap();
    let w0 = superpose(&fam, &g).unwrap();
    let mirror = |w: &ScalarField| {
        let mut out = w.clone();
        for i in 0..g.nr() {
            for m in 0..g.nz() {
                out.values_mut()[g.idx(i, m)] = -w.at(i, g.nz() - 1 - m);
            }
        }
        out
    };
    let a = EulerSolver::new(base.clone()).unwrap();
    let b = EulerSolver::new(mirrored_cfg).unwrap();
    let mut sa = a.state_from(0.0, w0.clone()).unwrap();
    let mut sb = b.state_from(0.0, mirror(&w0)).unwrap();
    for _ in 0..base.steps() {
        sa = a.step(&sa).unwrap();
        sb = b.step(&sb).unwrap();
    }
    let ma = mirror(&sa.omega);
    let diff = ma.values().iter().zip(sb.omega.values()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(diff <= 1e-9 * sa.maxnorm0, "{diff}");
}

#[test]
fn doubling_substeps_barely_moves_the_center() {
    let coarse = SolverConfig::new(EPS, 1.0, 2e-3, 0.1, grid());
    let mut fine = coarse.clone();
    fine.substeps *= 2;
    let a = centers(coarse);
    let b = centers(fine);
    let worst = a.iter().zip(&b).fold(0.0f64, |m, ((_, p), (_, q))| m.max((*p - *q).norm()));
    // interpolation error scale: a few percent of a cell
    let h = grid().max_spacing();
    assert!(worst < 0.05 * h, "{worst} vs {}", 0.05 * h);
}

#[test]
fn centroid_of_initial_ring_is_the_ring_center() {
    let w = superpose(&ring(), &grid()).unwrap();
    let c = ring_centroids(&w, &[Vec2::new(1.0, 0.0)], 0.5).unwrap();
    assert!((c[0] - Vec2::new(1.0, 0.0)).norm() < 0.02);
}
