//! Frontends from external model descriptions to circuits, and seeded random circuits.

mod cnf;
mod forest;
mod random;
mod rgc;

pub use cnf::{cnf_to_gadgets, Cnf};
pub use forest::{forest_to_circuit, Forest, Node, Tree};
pub use random::{
    generate, random_circuit, random_compatible_pair, random_mdet, random_with_spec, random_with_vtree, variables,
    GenSpec, Vtree,
};
pub use rgc::{regression_to_circuit, Gate, RegressionCircuit};
