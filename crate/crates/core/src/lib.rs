//! Superhedging and arbitrage analysis for discrete-time markets with convex
//! transaction costs on finite event trees.
//!
//! A market is described by one solvency set per tree node: the portfolios
//! that are freely available at that node. Sets are polyhedral, given either
//! directly in halfspace form or in a lifted form with auxiliary variables
//! (used for currency markets with nonlinear exchange costs). Every
//! computation reduces to a linear program solved by the in-crate simplex
//! kernel in [`lp`].
//!
//! Module map:
//!
//! - [`tree`]: the event tree and node-indexed vector processes.
//! - [`geometry`]: halfspace/generator representations, polars, recession
//!   cones, lineality spaces, support functions and relative interiors.
//! - [`lp`]: dense two-phase primal simplex with duals.
//! - [`market`]: market model constructors (bid-ask, convex cost, currency
//!   illiquidity, explicit polyhedra) and the recession model.
//! - [`arbitrage`]: no-arbitrage, robust no-arbitrage, robust no scalable
//!   arbitrage and model dominance.
//! - [`pricing`]: superhedging membership, minimal premiums, dual bounds and
//!   consistent price systems.
//! - [`oracle`]: brute-force verifiers that never touch the LP kernel.

pub mod arbitrage;
mod formulation;
pub mod geometry;
pub mod lp;
pub mod market;
pub mod oracle;
pub mod pricing;
pub mod tol;
pub mod tree;

pub use arbitrage::{
    check_dominance, check_na, check_robust_na, check_robust_no_scalable_arbitrage, ArbitrageError,
    NaReport, RobustReport,
};
pub use geometry::{GeometryError, HPolyhedron, VCone};
pub use lp::{solve_lp, LinearProgram, LpError, LpSolution, LpStatus, Relation};
pub use market::{
    BidAskSpec, CostPiece, CostProcessSpec, CurrencyIlliquiditySpec, MarketError, MarketModel,
    ScalarPiece, SolvencySet,
};
pub use oracle::{
    brute_membership_at, brute_polar_check, brute_superhedge_one_period,
    interval_martingale_feasibility, Interval, OracleError,
};
pub use pricing::{
    claim_in_a, claim_in_at, dual_bound, dual_bound_with, dual_crossing_premium,
    find_consistent_price_system, minimal_premium, price_system_search, superhedge_check,
    superhedge_premium, DualBound, DualEncoding, Membership, Normalization, PremiumStatus,
    PriceSystem, PricingError, Superhedge, SuperhedgeCheck,
};
pub use tree::{AdaptedVectorProcess, EventTree, RawNode, TreeError};
