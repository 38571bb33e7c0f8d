//! Front end, elaborator, and explicit-state checkers for the Seni
//! transition-system language.
//!
//! The pipeline is: [`lexer`] and [`parser`] turn source text into a
//! [`ast::ProgramAst`]; [`sema`] links imports, merges refinement
//! hierarchies, and type-checks into [`sema::SystemDef`]s; [`elab`] turns a
//! definition into an executable [`elab::SystemInstance`]; [`explore`] builds
//! the reachable labelled transition system; [`verify`] and [`refine`] check
//! safety properties, satisfiability, deadlocks, and simulation preorders
//! over the result.
//!
//! The crate is `no_std` (with `alloc`): it performs no IO. Sources reach
//! [`sema::resolve_imports`] through the [`sema::ModuleLoader`] trait.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod ast;
pub mod diag;
pub mod elab;
pub mod eval;
pub mod explore;
pub mod lexer;
pub mod parser;
pub mod refine;
pub mod rng;
pub mod sema;
pub mod token;
pub mod types;
pub mod value;
pub mod verify;
