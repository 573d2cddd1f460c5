//! Figure-data presets: each preset emits one CSV file containing one or
//! more curve blocks. A block starts with a `#` comment line naming the
//! case, program, profile, and beta, followed by a `ne,max_nx` (or
//! `m,max_nx,ne`) table; blocks are separated by blank lines.
//!
//! Beta conventions per block: l0-type and pseudo-inverse curves use
//! `beta = ln m` so the failure bound `e^{-beta}` equals `1/m`; l1 curves
//! use `beta = ln(3m)` so `3 e^{-beta}` equals `1/m` as well. The scaling
//! preset targets success probability `1 - 10^{-15}` with `beta = ln(3e15)`.

use sparsecor::dictionary::CoherenceProfile;
use sparsecor::guarantees::{BetaRule, Program, Scenario};
use sparsecor::montecarlo::{scaling_table, threshold_curve, NeRule};
use sparsecor::Error;

pub const PRESETS: &[&str] = &[
    "fig-unitary-a",
    "fig-unitary-b",
    "fig-unitary-c",
    "fig-3onb-a",
    "fig-3onb-b",
    "fig-3onb-c",
    "fig-knowledge",
    "fig-knowledge-etf",
    "fig-scaling",
];

/// Log-spaced interference sparsities from 1 to `max`, eight points per
/// decade, deduplicated.
fn ne_grid(max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let v = 10f64.powf(k as f64 / 8.0).round() as u64;
        if v > max {
            break;
        }
        if out.last() != Some(&v) {
            out.push(v);
        }
        k += 1;
    }
    out
}

struct Curve {
    scenario: Scenario,
    profile: CoherenceProfile,
    profile_name: &'static str,
    beta: f64,
}

fn pinv(x_random: bool, e_random: bool) -> Scenario {
    Scenario::both_known(x_random, e_random).expect("valid scenario")
}

fn scenario(
    x_known: bool,
    e_known: bool,
    x_random: bool,
    e_random: bool,
    program: Program,
) -> Scenario {
    Scenario::new(x_known, e_known, x_random, e_random, program).expect("valid scenario")
}

fn ln(m: u64) -> f64 {
    (m as f64).ln()
}

fn ln3(m: u64) -> f64 {
    (3.0 * m as f64).ln()
}

fn render_curves(curves: &[Curve]) -> Result<String, Error> {
    let mut out = String::new();
    for c in curves {
        let grid = ne_grid(c.profile.n_b);
        let data = threshold_curve(&c.scenario, &c.profile, &grid, BetaRule::Explicit(c.beta))?;
        out.push_str(&format!(
            "# case={} program={} profile={} m={} beta={}\n",
            c.scenario.case_label(),
            match c.scenario.program {
                Program::L0 => "l0",
                Program::L1 => "l1",
                Program::Pseudoinverse => "pinv",
            },
            c.profile_name,
            c.profile.m,
            c.beta,
        ));
        out.push_str("ne,max_nx\n");
        for (ne, nx) in data {
            out.push_str(&format!("{ne},{nx}\n"));
        }
        out.push('\n');
    }
    Ok(out)
}

fn unitary_family(
    preset: char,
    profile_of: impl Fn(u64) -> CoherenceProfile,
    profile_name: &'static str,
    ms: &[u64],
) -> Vec<Curve> {
    let mut curves = Vec::new();
    for &m in ms {
        match preset {
            // Both supports known: pseudo-inverse recovery, one curve per
            // randomness model.
            'a' => {
                curves.push(Curve {
                    scenario: pinv(true, false),
                    profile: profile_of(m),
                    profile_name,
                    beta: ln(m),
                });
                curves.push(Curve {
                    scenario: pinv(true, true),
                    profile: profile_of(m),
                    profile_name,
                    beta: ln(m),
                });
            }
            // Interference support known: l0 and l1 programs, one or both
            // supports random.
            'b' => {
                for program in [Program::L0, Program::L1] {
                    let beta = if program == Program::L1 { ln3(m) } else { ln(m) };
                    curves.push(Curve {
                        scenario: scenario(false, true, true, false, program),
                        profile: profile_of(m),
                        profile_name,
                        beta,
                    });
                    curves.push(Curve {
                        scenario: scenario(false, true, true, true, program),
                        profile: profile_of(m),
                        profile_name,
                        beta,
                    });
                }
            }
            // No support knowledge: l1 only.
            'c' => {
                curves.push(Curve {
                    scenario: scenario(false, false, true, false, Program::L1),
                    profile: profile_of(m),
                    profile_name,
                    beta: ln3(m),
                });
                curves.push(Curve {
                    scenario: scenario(false, false, true, true, Program::L1),
                    profile: profile_of(m),
                    profile_name,
                    beta: ln3(m),
                });
            }
            _ => unreachable!(),
        }
    }
    curves
}

pub fn render(preset: &str) -> Result<String, Error> {
    let unitary = CoherenceProfile::unitary_max_incoherent;
    let two_onb = CoherenceProfile::two_onb_interference;
    match preset {
        "fig-unitary-a" => render_curves(&unitary_family(
            'a',
            unitary,
            "unitary",
            &[10_000, 100_000_000],
        )),
        "fig-unitary-b" => render_curves(&unitary_family('b', unitary, "unitary", &[100_000_000])),
        "fig-unitary-c" => render_curves(&unitary_family('c', unitary, "unitary", &[100_000_000])),
        "fig-3onb-a" => render_curves(&unitary_family('a', two_onb, "two-onb", &[100_000_000])),
        "fig-3onb-b" => render_curves(&unitary_family('b', two_onb, "two-onb", &[100_000_000])),
        "fig-3onb-c" => render_curves(&unitary_family('c', two_onb, "two-onb", &[100_000_000])),
        "fig-knowledge" => {
            let mut curves = Vec::new();
            for m in [1_000_000u64, 100_000_000] {
                curves.push(Curve {
                    scenario: pinv(true, true),
                    profile: unitary(m),
                    profile_name: "unitary",
                    beta: ln(m),
                });
                curves.push(Curve {
                    scenario: scenario(false, true, true, true, Program::L0),
                    profile: unitary(m),
                    profile_name: "unitary",
                    beta: ln(m),
                });
                curves.push(Curve {
                    scenario: scenario(false, false, true, true, Program::L0),
                    profile: unitary(m),
                    profile_name: "unitary",
                    beta: ln(m),
                });
            }
            render_curves(&curves)
        }
        "fig-knowledge-etf" => {
            let m = 100_000_000u64;
            let curves = vec![
                Curve {
                    scenario: pinv(true, true),
                    profile: two_onb(m),
                    profile_name: "two-onb",
                    beta: ln(m),
                },
                Curve {
                    scenario: scenario(false, true, true, true, Program::L0),
                    profile: two_onb(m),
                    profile_name: "two-onb",
                    beta: ln(m),
                },
                Curve {
                    scenario: scenario(false, false, true, true, Program::L0),
                    profile: two_onb(m),
                    profile_name: "two-onb",
                    beta: ln(m),
                },
                // Roles reversed: the interference dictionary is unitary.
                Curve {
                    scenario: pinv(true, true),
                    profile: two_onb(m).swapped(),
                    profile_name: "two-onb-rev",
                    beta: ln(m),
                },
                Curve {
                    scenario: scenario(false, true, true, true, Program::L0),
                    profile: two_onb(m).swapped(),
                    profile_name: "two-onb-rev",
                    beta: ln(m),
                },
            ];
            render_curves(&curves)
        }
        "fig-scaling" => {
            let ms: Vec<u64> = (8..=24).map(|k| 10u64.pow(k / 2) * if k % 2 == 1 { 3 } else { 1 }).collect();
            let mut out = String::new();
            for (name, rule) in [
                ("const-1e3", NeRule::Const(1000)),
                ("sqrt-m", NeRule::SqrtM),
                ("m-over-1e5", NeRule::MOver(1e5)),
            ] {
                let table = scaling_table(&ms, rule)?;
                out.push_str(&format!(
                    "# curve=scaling ne_rule={name} program=l1 case=2b beta={}\n",
                    (3e15f64).ln()
                ));
                out.push_str("m,max_nx,ne\n");
                for (m, nx, ne) in table {
                    out.push_str(&format!("{m},{nx},{ne}\n"));
                }
                out.push('\n');
            }
            Ok(out)
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown figure preset `{other}`; valid presets: {}",
            PRESETS.join(", ")
        ))),
    }
}
