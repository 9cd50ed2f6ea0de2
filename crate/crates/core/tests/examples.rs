#[allow(dead_code)]
#[path = "../examples/measures.rs"]
mod measures;

#[allow(dead_code)]
#[path = "../examples/uniform_integrability.rs"]
mod uniform_integrability;

#[allow(dead_code)]
#[path = "../examples/vitali_scalar.rs"]
mod vitali_scalar;

#[allow(dead_code)]
#[path = "../examples/rademacher_gallery.rs"]
mod rademacher_gallery;

#[allow(dead_code)]
#[path = "../examples/hausdorff_support.rs"]
mod hausdorff_support;

#[allow(dead_code)]
#[path = "../examples/set_valued_limits.rs"]
mod set_valued_limits;

#[allow(dead_code)]
#[path = "../examples/mcshane_limits.rs"]
mod mcshane_limits;

#[allow(dead_code)]
#[path = "../examples/campaign.rs"]
mod campaign;


#[test]
fn measures_runs() {
    measures::run_example().unwrap();
}

#[test]
fn uniform_integrability_runs() {
    uniform_integrability::run_example().unwrap();
}

#[test]
fn vitali_scalar_runs() {
    vitali_scalar::run_example().unwrap();
}

#[test]
fn rademacher_gallery_runs() {
    rademacher_gallery::run_example().unwrap();
}

#[test]
fn hausdorff_support_runs() {
    hausdorff_support::run_example().unwrap();
}

#[test]
fn set_valued_limits_runs() {
    set_valued_limits::run_example().unwrap();
}

#[test]
fn mcshane_limits_runs() {
    mcshane_limits::run_example().unwrap();
}

#[test]
fn campaign_runs() {
    campaign::run_example().unwrap();
}
