//! Chain event graphs for asymmetric sequential decision problems.
//!
//! The pipeline runs from a text model ([`model_io`]) through a validated,
//! staged event tree ([`event_tree`]) to a chain event graph built by position
//! coalescence ([`coalesce`]). On the graph one can compute an optimal
//! strategy ([`solve`]), simplify ([`transform`]) and read off
//! conditional-independence statements ([`ci`]). [`oracle`] recomputes values
//! on the raw tree for cross-checking.
//!
//! ```
//! use cegd::{build_ceg, parse_model, solve, validate_tree};
//!
//! let text = "\
//! node d kind=decision
//! node c kind=chance
//! leaf safe utility=10
//! leaf lose utility=0
//! leaf win utility=20
//! edge d safe label=a
//! edge d c label=b
//! edge c lose label=lo prob=0.6
//! edge c win label=hi prob=0.4
//! root d
//! ";
//! let tree = validate_tree(&parse_model(text).unwrap()).unwrap();
//! let ceg = build_ceg(&tree, tree.flavour()).unwrap();
//! let (_, strategy) = solve(&ceg).unwrap();
//! assert_eq!(strategy.value, 10.0);
//! ```

pub mod ceg;
pub mod ci;
pub mod cli;
pub mod coalesce;
pub mod event_tree;
pub mod model_io;
mod numeric;
pub mod oracle;
pub mod solve;
pub mod transform;

pub use ceg::{Ceg, CegEdge, CegEdgeId, Position, PositionId, PositionKind};
pub use ci::{CiError, CiStatement, ContextItem, Cut};
pub use coalesce::{build_ceg, compute_positions, CoalesceError, PositionPartition};
pub use event_tree::{validate_tree, EventTree, Flavour, Levels, NodeId, StageId};
pub use model_io::{export_dot, parse_model, ModelDocument, SolveReport};
pub use numeric::{PROB_TOLERANCE, UTILITY_TOLERANCE};
pub use solve::{propagate, solve, PropagationState, Strategy};
pub use transform::{delete_barren, manipulate, parsimonize, recoalesce, Manipulation, TransformError};
