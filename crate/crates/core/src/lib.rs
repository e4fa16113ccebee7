//! Group algebras of finite p-groups over finite fields of characteristic p,
//! the filtration by powers of the augmentation ideal, and filtered
//! multiplicative bases.

pub mod ff;
pub mod fmb;
pub mod galg;
pub mod grp;
pub mod linalg;
pub mod search;

pub use ff::{make_field, Field, FieldError, FieldSpec, Scalar};
pub use galg::{compute_filtration, parse_element, AlgebraElement, AlgebraError, Filtration, GroupAlgebra, Level};
pub use grp::{build_group, Group, GroupError, GroupSpec};
pub use fmb::{construct, verify, BasisCandidate, ConstructParams, Construction, VerificationReport};
pub use search::{search_fmb, SearchConfig, SearchReport, Strategy};
