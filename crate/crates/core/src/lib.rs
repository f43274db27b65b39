//! Translation of Python federated-learning programs written against a small
//! message-passing API into CSP# models, and an explicit-state checker for
//! the resulting models.

pub mod checker;
pub mod corpus;
pub mod cspir;
pub mod frontend;
pub mod translate;
