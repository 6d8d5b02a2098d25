pub mod ensemble;
pub mod envariance;
pub mod flow_field;
pub mod nonlinear;
pub mod trajectory;
