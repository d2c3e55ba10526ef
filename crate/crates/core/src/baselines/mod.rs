//! Baseline LCAs for comparison: randomized greedy MIS by local simulation
//! and full-ball simulation of the reference algorithm.

mod ball;
mod rgmis;

pub use ball::{
    ball_simulate_answer, estimated_probes, moore_bound, BallAnswer, BallMode, DEFAULT_BALL_BUDGET,
};
pub use rgmis::{
    rgmis_answer, rgmis_answer_with, sequential_greedy, NeighborOrder, Priority, RgContext,
};
