//! Irregular data layouts over points: [`Section`] (CSR-style point to
//! dof-range map) and [`Label`] (integer value to point-set map).

mod label;
mod section;

pub use label::Label;
pub use section::Section;
