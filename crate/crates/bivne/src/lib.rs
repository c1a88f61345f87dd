//! Virtual network embedding for MEC substrates interconnected by elastic
//! optical links.
//!
//! The crate models a physical network of compute nodes joined by
//! frequency-slotted optical links, and embeds arriving virtual network
//! requests onto it. Node placement is searched by an ant colony system
//! whose pheromone trails are reinforced by the cost of the full embedding;
//! link routing and spectrum assignment are solved exactly per candidate
//! placement by a shortest-path + exact-fit lower level. Costs charge both
//! the raw resources consumed and the fragmentation they leave behind, so
//! the search is steered toward embeddings that keep the spectrum and the
//! node pools usable for future requests.
//!
//! Module map:
//! - [`substrate`]: physical topology, spectrum state, allocation/release
//! - [`vnr`]: virtual network requests and batch generation
//! - [`fragcost`]: revenue, fragmentation-aware costs, exact money arithmetic
//! - [`lower_solver`]: per-placement routing and exact-fit slot assignment
//! - [`acs_upper`]: ant colony search over node placements
//! - [`baselines`]: greedy / load-ranked / proximity-ranked reference embedders
//! - [`harness`]: seeded experiments, constraint validation, CSV/JSON export

pub mod acs_upper;
pub mod baselines;
pub mod fragcost;
pub mod harness;
pub mod lower_solver;
pub mod substrate;
pub mod vnr;
