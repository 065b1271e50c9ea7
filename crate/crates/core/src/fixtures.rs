//! Small finite-support instances with golden laws of `S_n` on `{0..=64}`,
//! produced by the joint `(X_m, S_m)` dynamic program in
//! [`crate::exact::reference`].

use crate::error::Result;
use crate::exact::Pmf;
use crate::regvar::Law;

pub const FIXTURE_CUTOFF: usize = 64;

#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub offspring: &'static str,
    pub immigration: &'static str,
    pub n: usize,
    golden: &'static str,
}

impl Fixture {
    pub fn offspring_law(&self) -> Result<Law> {
        self.offspring.parse()
    }

    pub fn immigration_law(&self) -> Result<Law> {
        self.immigration.parse()
    }

    /// The golden law of `S_n`.
    pub fn golden(&self) -> Result<Pmf<f64>> {
        Pmf::from_csv(self.golden)
    }
}

macro_rules! fixture {
    ($name:literal, $xi:literal, $eta:literal, $n:literal) => {
        Fixture {
            name: $name,
            offspring: $xi,
            immigration: $eta,
            n: $n,
            golden: include_str!(concat!("../fixtures/", $name, ".csv")),
        }
    };
}

pub const FIXTURES: [Fixture; 12] = [
    fixture!("coin_coin_n3", "finite(0:0.5,1:0.5)", "finite(0:0.5,1:0.5)", 3),
    fixture!("three_point_n4", "finite(0:0.6,1:0.2,2:0.2)", "finite(0:0.3,1:0.4,2:0.3)", 4),
    fixture!("thin_unit_n6", "bernoulli(q=0.3)", "point(1)", 6),
    fixture!("lumpy_n5", "finite(0:0.7,3:0.3)", "finite(0:0.8,1:0.2)", 5),
    fixture!("pairs_n2", "finite(0:0.75,2:0.25)", "finite(1:0.5,2:0.5)", 2),
    fixture!("rare_burst_n6", "finite(0:0.4,1:0.5,4:0.1)", "finite(0:0.9,5:0.1)", 6),
    fixture!("near_critical_n6", "bernoulli(q=0.9)", "finite(0:0.2,1:0.2,2:0.2,3:0.4)", 6),
    fixture!("fives_n4", "finite(0:0.85,5:0.15)", "point(2)", 4),
    fixture!("sterile_n5", "point(0)", "finite(0:0.5,3:0.5)", 5),
    fixture!("single_gen_n1", "finite(0:0.5,1:0.3,2:0.2)", "finite(0:0.25,4:0.75)", 1),
    fixture!("spread_n6", "finite(0:0.6,1:0.1,2:0.1,3:0.2)", "finite(1:0.3,6:0.7)", 6),
    fixture!("overflowing_n6", "bernoulli(q=0.5)", "finite(0:0.1,10:0.9)", 6),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::reference::joint_dp_sn;

    /// Rewrites the golden files: `cargo test -p bpi-core regenerate -- --ignored`.
    #[test]
    #[ignore]
    fn regenerate_golden_files() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
        for f in FIXTURES {
            let masses = joint_dp_sn(&f.offspring_law().unwrap(), &f.immigration_law().unwrap(), f.n, FIXTURE_CUTOFF);
            let pmf = Pmf::from_window(masses).unwrap();
            std::fs::write(dir.join(format!("{}.csv", f.name)), pmf.to_csv()).unwrap();
        }
    }

    #[test]
    fn golden_files_parse_and_match_oracle() {
        for f in FIXTURES {
            let golden = f.golden().unwrap();
            assert_eq!(golden.cutoff(), FIXTURE_CUTOFF);
            let fresh = joint_dp_sn(&f.offspring_law().unwrap(), &f.immigration_law().unwrap(), f.n, FIXTURE_CUTOFF);
            for (k, m) in fresh.iter().enumerate() {
                assert_eq!(golden.mass(k), *m, "{} at {k}", f.name);
            }
        }
    }
}
