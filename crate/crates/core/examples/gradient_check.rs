//! Compare every analytic gradient with central differences.

use echofit::gradcheck::check_all;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for r in check_all(100, 7)? {
        println!("{:<12} max rel error {:.2e} (worst: {})", r.model.name(), r.max_rel_error, r.worst_param);
    }
    Ok(())
}
