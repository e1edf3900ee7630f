//! The hURF contract language: syntax, static checks, evaluation and the
//! reference semantics of contract configurations.

pub mod ast;
pub mod check;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod semantics;

pub use ast::{BinOp, Contract, Expr, MapDecl, Receive, Rule, Stmt, UnOp, VarDecl};
pub use check::{check_contract, Access, CheckError, CheckedContract, CheckedRule};
pub use parser::{parse_contract, ParseError};
pub use printer::print_contract;
