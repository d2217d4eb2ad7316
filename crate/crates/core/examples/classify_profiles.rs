//! Classifies the built-in profile family for both orderings of the permittivities.

use twolayer::geometry::{classify_default, endpoint_slopes, profile_norms, BuiltinProfile, PhysicalParams};

fn main() -> twolayer::Result<()> {
    for (s1, s2) in [(1.0, 2.0), (2.0, 1.0)] {
        let params = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, s1, s2)?;
        println!("sigma1 = {s1}, sigma2 = {s2}");
        for shape in BuiltinProfile::standard_family() {
            let profile = shape.sample(params, 128)?;
            let adm = classify_default(&profile)?;
            let (left, right) = endpoint_slopes(&profile);
            let norms = profile_norms(&profile);
            println!(
                "  {:<16} {:<13} u'(-L) {left:+.3} u'(L) {right:+.3} |u|_H2 {:.3} contact runs {:?}",
                shape.label(),
                format!("{:?}", adm.class),
                norms.h2,
                adm.coincidence
            );
        }
    }
    Ok(())
}
