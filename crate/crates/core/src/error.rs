use alloc::string::String;

use crate::linkfn::LinkValue;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("transform is undefined on link value {0}")]
    UndefinedTransform(LinkValue),
    #[error("search budget exceeded: about {estimated:.3e} nodes, budget {budget:.3e}")]
    Budget { estimated: f64, budget: f64 },
    #[error("invalid state: {0}")]
    State(String),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

macro_rules! arg_err {
    ($($t:tt)*) => {
        $crate::error::Error::Argument(alloc::format!($($t)*))
    };
}
pub(crate) use arg_err;
