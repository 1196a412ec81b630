use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::sink::SinkEntry;
use crate::executor::ReplayClock;
use crate::store::TemplateStore;
use crate::time::SECONDS_PER_WEEK;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinuteCount {
    /// Minute of the week.
    pub minute: u32,
    pub scheduled: u64,
    /// Arrivals whose receive instant maps into this simulated minute.
    pub observed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourCount {
    pub day: u8,
    pub hour: u8,
    pub scheduled: u64,
    /// Arrivals attributed to the hour their template was scheduled in.
    pub observed: u64,
    /// Arrivals whose receive instant maps into this simulated hour.
    pub observed_by_receipt: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagStats {
    pub count: u64,
    pub mean: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub p999: f64,
    pub max: f64,
}

/// Observed traffic against the stored schedule. Lags are in simulated seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub scheduled: u64,
    pub observed: u64,
    pub malformed: u64,
    pub missing_ids: Vec<u64>,
    pub duplicate_ids: Vec<u64>,
    /// Ids received that are not scheduled inside the replayed range.
    pub unexpected_ids: Vec<u64>,
    pub epsilon: f64,
    pub within_epsilon: u64,
    pub within_epsilon_fraction: f64,
    /// Receive instant minus scheduled instant.
    pub lag: LagStats,
    pub per_minute: Vec<MinuteCount>,
    pub per_minute_max_abs_diff: u64,
    pub per_hour: Vec<HourCount>,
    /// Scheduled-hour attribution matches the schedule in every hour.
    pub per_hour_exact: bool,
    pub per_hour_receipt_max_abs_diff: u64,
    /// Per destination, the nonzero hours.
    pub per_destination_hour: BTreeMap<String, Vec<HourCount>>,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn lag_stats(mut lags: Vec<f64>) -> LagStats {
    lags.sort_by(|a, b| a.total_cmp(b));
    let n = lags.len();
    LagStats {
        count: n as u64,
        mean: if n == 0 { 0.0 } else { lags.iter().sum::<f64>() / n as f64 },
        p50: percentile(&lags, 0.50),
        p90: percentile(&lags, 0.90),
        p99: percentile(&lags, 0.99),
        p999: percentile(&lags, 0.999),
        max: lags.last().copied().unwrap_or(0.0),
    }
}

fn sim_bin(sim: f64, width: u32) -> Option<usize> {
    if !(0.0..f64::from(SECONDS_PER_WEEK)).contains(&sim) {
        return None;
    }
    Some(sim as usize / width as usize)
}

/// Compare a sink log with the store over the replayed range of `clock`.
///
/// Pure in its inputs: the same store, log and clock always give the same report.
pub fn fidelity_report(store: &TemplateStore, log: &[SinkEntry], clock: &ReplayClock) -> FidelityReport {
    let scheduled = store.fetch_range(clock.start, clock.end());
    let by_id: HashMap<u64, usize> = scheduled.iter().enumerate().map(|(i, r)| (r.id, i)).collect();

    let mut seen = vec![0u32; scheduled.len()];
    let mut per_minute_sched = vec![0u64; (SECONDS_PER_WEEK / 60) as usize];
    let mut per_minute_obs = vec![0u64; per_minute_sched.len()];
    let mut hour_sched = vec![0u64; 168];
    let mut hour_obs = vec![0u64; 168];
    let mut hour_recv = vec![0u64; 168];
    let mut dest: BTreeMap<&str, Vec<[u64; 3]>> = BTreeMap::new();

    for r in scheduled {
        let t = r.instant();
        per_minute_sched[(t / 60) as usize] += 1;
        hour_sched[(t / 3600) as usize] += 1;
        dest.entry(r.address.as_str()).or_insert_with(|| vec![[0; 3]; 168])[(t / 3600) as usize][0] += 1;
    }

    let mut malformed = 0u64;
    let mut observed = 0u64;
    let mut unexpected = Vec::new();
    let mut lags = Vec::new();
    let mut within = 0u64;
    for e in log {
        let Some(id) = e.template_id.filter(|_| e.status < 400) else {
            malformed += 1;
            continue;
        };
        observed += 1;
        let Some(&i) = by_id.get(&id) else {
            unexpected.push(id);
            continue;
        };
        seen[i] += 1;
        if seen[i] > 1 {
            continue;
        }
        let r = &scheduled[i];
        let t = r.instant();
        let sim = clock.sim_at_unix_ns(e.recv_ns);
        let lag = sim - f64::from(t);
        if lag.abs() <= clock.epsilon {
            within += 1;
        }
        lags.push(lag);
        hour_obs[(t / 3600) as usize] += 1;
        let d = dest.get_mut(r.address.as_str()).expect("scheduled destination");
        d[(t / 3600) as usize][1] += 1;
        if let Some(m) = sim_bin(sim, 60) {
            per_minute_obs[m] += 1;
        }
        if let Some(h) = sim_bin(sim, 3600) {
            hour_recv[h] += 1;
            d[h][2] += 1;
        }
    }

    let missing_ids = scheduled.iter().zip(&seen).filter(|(_, &n)| n == 0).map(|(r, _)| r.id).collect();
    let duplicate_ids = scheduled.iter().zip(&seen).filter(|(_, &n)| n > 1).map(|(r, _)| r.id).collect();
    unexpected.sort_unstable();
    unexpected.dedup();

    let per_minute: Vec<MinuteCount> = per_minute_sched
        .iter()
        .zip(&per_minute_obs)
        .enumerate()
        .filter(|(_, (s, o))| **s > 0 || **o > 0)
        .map(|(m, (&s, &o))| MinuteCount { minute: m as u32, scheduled: s, observed: o })
        .collect();
    let per_minute_max_abs_diff = per_minute.iter().map(|m| m.scheduled.abs_diff(m.observed)).max().unwrap_or(0);

    let hour = |h: usize, s: u64, o: u64, rcv: u64| HourCount {
        day: (h / 24) as u8,
        hour: (h % 24) as u8,
        scheduled: s,
        observed: o,
        observed_by_receipt: rcv,
    };
    let per_hour: Vec<HourCount> = (0..168).map(|h| hour(h, hour_sched[h], hour_obs[h], hour_recv[h])).collect();
    let per_hour_exact = per_hour.iter().all(|h| h.scheduled == h.observed);
    let per_hour_receipt_max_abs_diff = per_hour
        .iter()
        .map(|h| h.scheduled.abs_diff(h.observed_by_receipt))
        .max()
        .unwrap_or(0);
    let per_destination_hour = dest
        .into_iter()
        .map(|(name, cells)| {
            let hours = cells
                .iter()
                .enumerate()
                .filter(|(_, c)| c.iter().any(|&v| v > 0))
                .map(|(h, c)| hour(h, c[0], c[1], c[2]))
                .collect();
            (name.to_string(), hours)
        })
        .collect();

    let lag = lag_stats(lags);
    FidelityReport {
        scheduled: scheduled.len() as u64,
        observed,
        malformed,
        missing_ids,
        duplicate_ids,
        unexpected_ids: unexpected,
        epsilon: clock.epsilon,
        within_epsilon: within,
        within_epsilon_fraction: if lag.count == 0 { 1.0 } else { within as f64 / lag.count as f64 },
        lag,
        per_minute,
        per_minute_max_abs_diff,
        per_hour,
        per_hour_exact,
        per_hour_receipt_max_abs_diff,
        per_destination_hour,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_percentiles() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.5), 50.0);
        assert_eq!(percentile(&v, 0.99), 99.0);
        assert_eq!(percentile(&v, 1.0), 100.0);
        assert_eq!(percentile(&[], 0.5), 0.0);
    }
}
