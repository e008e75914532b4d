pub mod algebraic;
pub mod campaign;
pub mod chain;
pub mod dominance;
pub mod heights;
pub mod interval;
pub mod numeration;
pub mod par;
pub mod poly;
pub mod recurrence;
pub mod reduction;
pub mod roots;
