pub mod rational;
pub mod trees;
pub mod bracketings;
pub mod operad;
pub mod plmaps;
pub mod cacti;
pub mod bo_action;
pub mod sampling;
pub mod wconstruction;
pub mod dendroidal;
pub mod suites;
pub mod cli;
