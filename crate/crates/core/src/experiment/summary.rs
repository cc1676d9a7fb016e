use serde::{Deserialize, Serialize};

use super::DistanceProfile;

/// One distance region and the buckets inside it that break its expectation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub region: u8,
    pub start: u32,
    pub end: u32,
    pub populated: Vec<u32>,
    pub offending: Vec<u32>,
}

impl RegionVerdict {
    pub fn is_consistent(&self) -> bool {
        self.offending.is_empty()
    }

    pub fn contains(&self, distance: u32) -> bool {
        (self.start..=self.end).contains(&distance)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spike {
    pub distance: u32,
    pub mean_theta: f64,
}

/// Region verdicts for a profile of length `N = 2^n`:
///
/// 1. `1 ..= N/8`, mean theta above 0.5;
/// 2. `N/8 + 1 ..= N/2 - 1`, mean theta strictly between 0 and 0.5;
/// 3. `N/2 ..= N`, mean theta exactly 0, except at `rho` for classes whose
///    members share one zero count, where it is exactly 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalSummary {
    pub length: u32,
    pub rho: Option<u32>,
    pub regions: Vec<RegionVerdict>,
    pub spike: Option<Spike>,
    /// Distances whose mean exceeds the previous populated distance's mean.
    /// Informational only.
    pub monotonicity_breaks: Vec<u32>,
}

impl IntervalSummary {
    pub fn is_consistent(&self) -> bool {
        self.regions.iter().all(RegionVerdict::is_consistent)
    }
}

pub fn interval_summary(profile: &DistanceProfile, rho: Option<u32>) -> IntervalSummary {
    let len = profile.length();
    let bounds = [(1, len / 8), (len / 8 + 1, len / 2 - 1), (len / 2, len)];
    let mut spike = None;
    let regions = bounds
        .iter()
        .enumerate()
        .map(|(i, &(start, end))| {
            let region = i as u8 + 1;
            let mut populated = Vec::new();
            let mut offending = Vec::new();
            for d in start..=end {
                let Some(b) = profile.bucket(d).filter(|b| b.count > 0) else {
                    continue;
                };
                populated.push(d);
                let mean = profile.mean_theta(d).unwrap_or_default();
                let ok = match region {
                    1 => mean > 0.5,
                    2 => mean > 0.0 && mean < 0.5,
                    _ if rho == Some(d) => {
                        spike = Some(Spike {
                            distance: d,
                            mean_theta: mean,
                        });
                        b.theta_units as f64 == b.count as f64 * profile.theta_scale()
                    }
                    _ => b.theta_units == 0,
                };
                if !ok {
                    offending.push(d);
                }
            }
            RegionVerdict {
                region,
                start,
                end,
                populated,
                offending,
            }
        })
        .collect();

    let rows = profile.rows();
    let monotonicity_breaks = rows
        .iter()
        .filter(|r| r.distance > 0)
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|w| w[1].mean_theta > w[0].mean_theta)
        .map(|w| w[1].distance)
        .collect();

    IntervalSummary {
        length: len,
        rho,
        regions,
        spike,
        monotonicity_breaks,
    }
}
