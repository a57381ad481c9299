pub mod certificate;
pub mod corpus;
pub mod fibered2d;
pub mod intervals;
pub mod linearcert;
pub mod num;
pub mod pa2d;
pub mod perturb;
pub mod pl1d;
pub mod projcircle;
pub mod structure1d;
pub mod words;
