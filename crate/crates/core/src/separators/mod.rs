//! Cut generation: Gomory mixed-integer cuts from the tableau and exact
//! Chvátal-Gomory separation over a (possibly reduced) set of rows.

mod cgmip;
mod cut;
mod gmi;

pub use cgmip::{
    build_cgmip, cg_cut_from_u, extract_cuts, filter_pool, run_cgmip, snap_floor, CgMipModel,
    EffortLimit, SeparationRun, SeparatorConfig,
};
pub use cut::{Cut, CutSource};
pub use gmi::gmi_cuts;
