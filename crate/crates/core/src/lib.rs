//! Exceptional Dehn fillings of chain-link exteriors: slopes, filling
//! instructions and their symmetries, closed-manifold normal forms, an `H1`
//! oracle, the rule table for the magic manifold, Diophantine solvers and the
//! family/search pipelines.

pub mod arith;
pub mod closed_fill;
pub mod conditions;
pub mod data;
pub mod diophantine;
pub mod enumerate;
pub mod homology;
pub mod instructions;
pub mod magic_rules;
pub mod poly;
#[cfg(test)]
mod properties;
pub mod seifert;
pub mod slopes;
