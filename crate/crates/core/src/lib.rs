//! A typed While language with a small-step interpreter, the static analyses
//! behind syntactic program equivalence, checkers for classes of backward
//! compatible updates, a dynamic-update simulator and a differential tester.

pub mod lang;
pub mod interp;
pub mod analysis;
pub mod equiv;
pub mod update_classes;
pub mod dsu;
pub mod difftest;
pub mod corpus;
