//! Availability injection on a CSV: larger slopes hide more of the values
//! above the centre.

use off_core::dataset::{inject_availability, read_csv, write_csv, FeatureInjection, InjectionSpec, Schema};

const LOANS: &str = "\
income,debt,savings,repaid
52,10,4.1,1
31,22,0.5,0
77,5,9.0,1
45,18,2.2,0
63,12,6.4,1
38,25,1.0,0
58,8,5.5,1
41,20,3.0,1
";

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schema = Schema::new(["income", "debt"], ["savings"], "repaid")?;
    let ds = read_csv(LOANS.as_bytes(), &schema, "N/A")?;
    for slope in [0.0, 1.0, 4.0] {
        let spec = InjectionSpec {
            features: vec![FeatureInjection {
                per_std: true,
                ..FeatureInjection::new("savings", slope)
            }],
        };
        let out = inject_availability(&ds, &spec, 11)?;
        let hidden = out.mask().column(0).filter(|a| !a).count();
        println!("slope {slope}: {hidden} of {} savings values hidden", ds.len());
        if slope == 4.0 {
            let mut buf = Vec::new();
            write_csv(&out, &mut buf, "N/A")?;
            print!("{}", String::from_utf8(buf)?);
        }
    }
    Ok(())
}
