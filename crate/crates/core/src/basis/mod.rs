//! Reference-element layer: polynomial bases, quadrature and the BDM element.

pub mod bdm;
pub mod polynomials;
pub mod quadrature;

pub use bdm::{bdm_element, build_bdm_element, BdmDof, BdmElement};
pub use polynomials::{dubiner_basis, legendre_facet_basis, BasisTable, ReferenceCell, ScalarBasis};
pub use quadrature::{gauss_rule, triangle_rule, QuadratureRule};
