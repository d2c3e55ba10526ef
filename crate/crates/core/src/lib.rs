//! Local computation algorithm for maximal independent set with
//! `poly(Δ) · log n` probe complexity, plus a global reference simulator,
//! baselines and an experiment harness.
//!
//! ```
//! use mis_lca::{graph::Graph, lca, tape::Params};
//!
//! let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
//! let params = Params::new(g.max_degree(), 7);
//! let answers: Vec<bool> = (0..3)
//!     .map(|v| lca::answer(&g, &params, v).unwrap().in_mis)
//!     .collect();
//! assert!(mis_lca::harness::verify_mis(&g, &answers).is_pass());
//! ```

pub mod baselines;
pub mod error;
pub mod graph;
pub mod harness;
pub mod lca;
pub mod local_ref;
pub mod par;
pub mod state;
pub mod tape;

pub use error::{Error, Result};
pub use graph::Graph;
pub use state::{NodeRoundState, Phase1Status};
pub use tape::Params;
