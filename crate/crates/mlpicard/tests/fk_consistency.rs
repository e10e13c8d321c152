//! The solver's expectation satisfies the same discrete fixed-point
//! recursion the grid oracle iterates: at matched depth and quadrature
//! order the Monte Carlo mean must land on the oracle iterate, up to the
//! CLT band plus the small nonlinearity-variance bias of order 1/M.

use mlpicard::mlp::{mlp_estimate, EvalMode, HeatParams};
use mlpicard::oracle::{picard_oracle, GridSpec};
use mlpicard::problems::manufactured;
use mlpicard::randomness::StreamKey;

#[test]
fn monte_carlo_means_track_oracle_iterates() {
    let named = manufactured(1, 1.0);
    let spec = GridSpec {
        time_points: 48,
        space_points: 257,
        space_radius: 8.0,
        hermite_order: 32,
        quad_order: 3,
    };
    let reps = 400u32;
    for (depth, at) in [(1u32, (0.0, 0.0)), (2, (0.0, 0.0)), (2, (0.3, 0.4)), (3, (0.0, 0.0))] {
        let params = HeatParams::new(depth, 8, 3).unwrap();
        let est = mlp_estimate(
            &named.problem,
            &EvalMode::Heat(params),
            at.0,
            &[at.1],
            &StreamKey::root(1000 + depth as u64),
            reps,
            true,
        )
        .unwrap();
        let oracle = picard_oracle(&named.problem, depth, &spec)
            .unwrap()
            .grid
            .evaluate(at.0, at.1);
        let band = 4.0 * est.std / (reps as f64).sqrt() + 0.01;
        assert!(
            (est.mean - oracle).abs() <= band,
            "depth {depth} at {at:?}: mean {} oracle {oracle} band {band}",
            est.mean
        );
    }
}
