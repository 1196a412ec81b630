//! Commuter profiles and the template-to-consumer matching.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Daily,
    Weekday,
    Weekend,
    Random,
}

impl Family {
    /// Days a consumer of this family may query on.
    pub fn days(self) -> &'static [u8] {
        match self {
            Family::Daily | Family::Random => &[0, 1, 2, 3, 4, 5, 6],
            Family::Weekday => &[0, 1, 2, 3, 4],
            Family::Weekend => &[5, 6],
        }
    }

    pub fn allows(self, day: u8) -> bool {
        self.days().contains(&day)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommuterProfileSpec {
    pub profile_no: u8,
    pub family: Family,
    /// `None` for the random profile, where the flag does not apply.
    pub same_location: Option<bool>,
    pub same_time: Option<bool>,
    pub probability: f64,
}

impl CommuterProfileSpec {
    pub fn same_location(&self) -> bool {
        self.same_location == Some(true)
    }

    pub fn same_time(&self) -> bool {
        self.same_time == Some(true)
    }
}

/// Printed per-profile shares of queries. The column sums to 0.9796 as printed (the counts
/// column sums to 880,050 rather than the stated total), so [`ProfileTable::published`]
/// renormalizes these weights.
pub const PUBLISHED_SHARES: [f64; 13] = [
    0.0935, 0.0312, 0.0156, 0.0156, 0.1670, 0.0557, 0.0278, 0.0278, 0.0312, 0.0312, 0.0039, 0.0117,
    0.4674,
];

/// Profiles whose same-hour anchor prefers rush-hour slots.
pub const RUSH_PREFERRED: [u8; 4] = [1, 3, 5, 7];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub profiles: Vec<CommuterProfileSpec>,
}

impl ProfileTable {
    pub fn published() -> Self {
        let sum: f64 = PUBLISHED_SHARES.iter().sum();
        let families = [Family::Daily, Family::Weekday, Family::Weekend];
        let mut profiles = Vec::with_capacity(13);
        for (fi, family) in families.into_iter().enumerate() {
            for (k, (sl, st)) in [(true, true), (true, false), (false, true), (false, false)]
                .into_iter()
                .enumerate()
            {
                let no = fi * 4 + k;
                profiles.push(CommuterProfileSpec {
                    profile_no: no as u8 + 1,
                    family,
                    same_location: Some(sl),
                    same_time: Some(st),
                    probability: PUBLISHED_SHARES[no] / sum,
                });
            }
        }
        profiles.push(CommuterProfileSpec {
            profile_no: 13,
            family: Family::Random,
            same_location: None,
            same_time: None,
            probability: PUBLISHED_SHARES[12] / sum,
        });
        ProfileTable { profiles }
    }

    pub fn get(&self, profile_no: u8) -> Option<&CommuterProfileSpec> {
        self.profiles.iter().find(|p| p.profile_no == profile_no)
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.profiles.iter().map(|p| p.probability).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::domain("profiles", format!("probabilities sum to {sum}, not 1")));
        }
        if self.profiles.iter().any(|p| !(0.0..=1.0).contains(&p.probability)) {
            return Err(Error::domain("profiles", "probability outside [0, 1]"));
        }
        if self.profiles.iter().filter(|p| p.family == Family::Random).count() != 1 {
            return Err(Error::domain("profiles", "exactly one random profile required"));
        }
        Ok(())
    }
}

/// Schedule coordinates of one template, as seen by the matcher.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotKey {
    pub place: usize,
    pub day: u8,
    pub hour: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocatedConsumer {
    pub profile_no: u8,
    pub home_place: Option<usize>,
    pub home_hour: Option<u8>,
}

#[derive(Debug, Clone)]
pub struct Allocation {
    pub consumers: Vec<AllocatedConsumer>,
    /// Consumer index for each template, parallel to the input slots.
    pub owner: Vec<u32>,
    /// Templates each constrained profile could not claim; they fell to the random profile.
    pub shortfall: Vec<(u8, u64)>,
}

/// Remaining template indices per (place, day, hour) plus running marginals.
struct Buckets {
    n_places: usize,
    cells: Vec<Vec<u32>>,
    day_hour: [[u64; 24]; 7],
    place_day: Vec<[u64; 7]>,
    day_total: [u64; 7],
}

impl Buckets {
    fn idx(&self, place: usize, day: u8, hour: u8) -> usize {
        (place * 7 + day as usize) * 24 + hour as usize
    }

    fn len(&self, place: usize, day: u8, hour: u8) -> u64 {
        self.cells[self.idx(place, day, hour)].len() as u64
    }

    fn take(&mut self, place: usize, day: u8, hour: u8) -> u32 {
        let i = self.idx(place, day, hour);
        let t = self.cells[i].pop().expect("bucket chosen with positive weight");
        self.day_hour[day as usize][hour as usize] -= 1;
        self.place_day[place][day as usize] -= 1;
        self.day_total[day as usize] -= 1;
        t
    }
}

fn pick_weighted<R: Rng + ?Sized>(weights: &[u64], rng: &mut R) -> Option<usize> {
    let total: u64 = weights.iter().sum();
    if total == 0 {
        return None;
    }
    let mut r = rng.random_range(0..total);
    for (i, &w) in weights.iter().enumerate() {
        if r < w {
            return Some(i);
        }
        r -= w;
    }
    unreachable!()
}

/// Match templates to commuter profiles.
///
/// Profiles are processed most-constrained first (daily, weekend, weekday; within a family
/// same-location-and-time, same-time, same-location, neither). Each minted consumer claims
/// one template on every day of its family, anchored to a shared place and/or hour as the
/// profile requires, with anchors drawn in proportion to the remaining templates they could
/// absorb. Same-time profiles listed in [`RUSH_PREFERRED`] anchor to rush hours while any
/// rush-hour anchor is feasible. A profile stops minting once another consumer would move
/// its template count further from its target share; unclaimed templates go to the random
/// profile, grouped into consumers owning 1 to `random_group_max` templates.
pub fn allocate_commuters<R: Rng + ?Sized>(
    slots: &[SlotKey],
    n_places: usize,
    table: &ProfileTable,
    rush_hours: &[bool; 24],
    random_group_max: usize,
    rng: &mut R,
) -> Result<Allocation> {
    table.validate()?;
    let n = slots.len() as u64;
    let mut b = Buckets {
        n_places,
        cells: vec![Vec::new(); n_places * 7 * 24],
        day_hour: [[0; 24]; 7],
        place_day: vec![[0; 7]; n_places],
        day_total: [0; 7],
    };
    for (t, s) in slots.iter().enumerate() {
        if s.place >= n_places || s.day > 6 || s.hour > 23 {
            return Err(Error::InfeasibleAllocation(format!("slot {t} out of range: {s:?}")));
        }
        let i = b.idx(s.place, s.day, s.hour);
        b.cells[i].push(t as u32);
        b.day_hour[s.day as usize][s.hour as usize] += 1;
        b.place_day[s.place][s.day as usize] += 1;
        b.day_total[s.day as usize] += 1;
    }
    for cell in b.cells.iter_mut() {
        cell.shuffle(rng);
    }

    let mut owner = vec![u32::MAX; slots.len()];
    let mut consumers: Vec<AllocatedConsumer> = Vec::new();
    let mut shortfall = Vec::new();

    let order = allocation_order(table);
    for spec in order {
        let target = (spec.probability * n as f64).round() as u64;
        let days = spec.family.days();
        let span = days.len() as u64;
        let rush_first = spec.same_time() && RUSH_PREFERRED.contains(&spec.profile_no);
        let mut claimed = 0u64;
        while 2 * claimed + span < 2 * target {
            let Some((home_place, home_hour)) =
                choose_anchor(&b, spec.same_location(), spec.same_time(), days, rush_first, rush_hours, rng)
            else {
                break;
            };
            let cid = consumers.len() as u32;
            for &d in days {
                let (p, h) = match (home_place, home_hour) {
                    (Some(p), Some(h)) => (p, h),
                    (None, Some(h)) => {
                        let w: Vec<u64> = (0..b.n_places).map(|p| b.len(p, d, h)).collect();
                        (pick_weighted(&w, rng).unwrap(), h)
                    }
                    (Some(p), None) => {
                        let w: Vec<u64> = (0..24u8).map(|h| b.len(p, d, h)).collect();
                        (p, pick_weighted(&w, rng).unwrap() as u8)
                    }
                    (None, None) => {
                        let w: Vec<u64> = (0..b.n_places)
                            .flat_map(|p| (0..24u8).map(move |h| (p, h)))
                            .map(|(p, h)| b.len(p, d, h))
                            .collect();
                        let i = pick_weighted(&w, rng).unwrap();
                        (i / 24, (i % 24) as u8)
                    }
                };
                let t = b.take(p, d, h);
                owner[t as usize] = cid;
            }
            consumers.push(AllocatedConsumer {
                profile_no: spec.profile_no,
                home_place,
                home_hour,
            });
            claimed += span;
        }
        if claimed < target {
            shortfall.push((spec.profile_no, target - claimed));
        }
    }

    let random = table
        .profiles
        .iter()
        .find(|p| p.family == Family::Random)
        .expect("validated");
    let mut rest: Vec<u32> = b.cells.into_iter().flatten().collect();
    rest.sort_unstable();
    rest.shuffle(rng);
    let max_group = random_group_max.max(1);
    let mut i = 0;
    while i < rest.len() {
        let size = rng.random_range(1..=max_group).min(rest.len() - i);
        let cid = consumers.len() as u32;
        for &t in &rest[i..i + size] {
            owner[t as usize] = cid;
        }
        consumers.push(AllocatedConsumer {
            profile_no: random.profile_no,
            home_place: None,
            home_hour: None,
        });
        i += size;
    }

    debug_assert!(owner.iter().all(|&o| o != u32::MAX));
    Ok(Allocation {
        consumers,
        owner,
        shortfall,
    })
}

fn allocation_order(table: &ProfileTable) -> Vec<&CommuterProfileSpec> {
    let family_rank = |f: Family| match f {
        Family::Daily => 0,
        Family::Weekend => 1,
        Family::Weekday => 2,
        Family::Random => 3,
    };
    let flag_rank = |p: &CommuterProfileSpec| match (p.same_location(), p.same_time()) {
        (true, true) => 0,
        (false, true) => 1,
        (true, false) => 2,
        (false, false) => 3,
    };
    let mut v: Vec<&CommuterProfileSpec> = table
        .profiles
        .iter()
        .filter(|p| p.family != Family::Random)
        .collect();
    v.sort_by_key(|p| (family_rank(p.family), flag_rank(p), p.profile_no));
    v
}

fn choose_anchor<R: Rng + ?Sized>(
    b: &Buckets,
    same_location: bool,
    same_time: bool,
    days: &[u8],
    rush_first: bool,
    rush_hours: &[bool; 24],
    rng: &mut R,
) -> Option<(Option<usize>, Option<u8>)> {
    let min_over_days = |f: &dyn Fn(u8) -> u64| days.iter().map(|&d| f(d)).min().unwrap_or(0);
    match (same_location, same_time) {
        (true, true) => {
            let mut w: Vec<u64> = (0..b.n_places)
                .flat_map(|p| (0..24u8).map(move |h| (p, h)))
                .map(|(p, h)| min_over_days(&|d| b.len(p, d, h)))
                .collect();
            if rush_first {
                let rush: Vec<u64> = w
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| if rush_hours[i % 24] { x } else { 0 })
                    .collect();
                if rush.iter().any(|&x| x > 0) {
                    w = rush;
                }
            }
            let i = pick_weighted(&w, rng)?;
            Some((Some(i / 24), Some((i % 24) as u8)))
        }
        (false, true) => {
            let mut w: Vec<u64> = (0..24u8)
                .map(|h| min_over_days(&|d| b.day_hour[d as usize][h as usize]))
                .collect();
            if rush_first {
                let rush: Vec<u64> = w
                    .iter()
                    .enumerate()
                    .map(|(h, &x)| if rush_hours[h] { x } else { 0 })
                    .collect();
                if rush.iter().any(|&x| x > 0) {
                    w = rush;
                }
            }
            let h = pick_weighted(&w, rng)?;
            Some((None, Some(h as u8)))
        }
        (true, false) => {
            let w: Vec<u64> = (0..b.n_places)
                .map(|p| min_over_days(&|d| b.place_day[p][d as usize]))
                .collect();
            let p = pick_weighted(&w, rng)?;
            Some((Some(p), None))
        }
        (false, false) => {
            if min_over_days(&|d| b.day_total[d as usize]) == 0 {
                None
            } else {
                Some((None, None))
            }
        }
    }
}
