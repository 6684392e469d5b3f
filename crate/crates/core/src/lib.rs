#![forbid(unsafe_code)]

//! Stallings automata for finitely generated subgroups of free groups.
//!
//! Every finitely generated subgroup `H ≤ F_n` has a unique finite
//! deterministic core automaton, its Stallings automaton `St(H)`, computed
//! by folding the flower automaton of any generating set. Once folded,
//! the classical subgroup problems become graph computations:
//!
//! - membership and witnesses ([`Subgroup::contains`], [`Subgroup::express`]),
//! - bases and ranks ([`Subgroup::basis`], [`Subgroup::rank`]),
//! - index, transversals, normality, conjugacy,
//! - intersections via the pullback product ([`Subgroup::intersect`]),
//!   with Hanna Neumann bound audits ([`Subgroup::shn_audit`]),
//! - coset intersection, Hall completions, and enumeration of all
//!   subgroups of a fixed finite index.
//!
//! ```
//! use stallings::{Alphabet, Subgroup, Word};
//!
//! let f2 = Alphabet::new(2);
//! let gens: Vec<Word> = ["aaa", "abaB", "AbaB"]
//!     .iter()
//!     .map(|t| Word::parse(f2, t).unwrap())
//!     .collect();
//! let h = Subgroup::make(f2, &gens).unwrap();
//! assert_eq!(h.rank(), 2);
//! assert!(h.contains(&Word::parse(f2, "a").unwrap()).unwrap());
//! ```

pub mod automaton;
pub mod error;
pub mod folding;
pub mod subgroup;
pub mod words;

pub use automaton::{Arc, ArcId, Flower, InvolutiveAutomaton, Step, VertexId};
pub use error::{Error, Result};
pub use folding::{FoldEvent, FoldKind, FoldingTrace, PetalWord};
pub use subgroup::{
    enumerate_index_subgroups, is_basis, is_free_family, is_generating, IndexData, ShnAudit,
    Subgroup,
};
pub use words::{Alphabet, Letter, Word};
