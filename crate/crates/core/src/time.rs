//! Simulated week time. Day 0 is Monday; instants are seconds since Monday 00:00:00.

use crate::error::{Error, Result};

pub const SECONDS_PER_DAY: u32 = 86_400;
pub const SECONDS_PER_WEEK: u32 = 7 * SECONDS_PER_DAY;

pub const DAY_NAMES: [&str; 7] = [
    "Monday",
    "Tuesday",
    "Wednesday",
    "Thursday",
    "Friday",
    "Saturday",
    "Sunday",
];

pub fn week_instant(day: u8, hour: u8, minute: u8, second: u8) -> u32 {
    u32::from(day) * SECONDS_PER_DAY
        + u32::from(hour) * 3600
        + u32::from(minute) * 60
        + u32::from(second)
}

/// Split a week instant into `(day, hour, minute, second)`.
pub fn split_instant(instant: u32) -> (u8, u8, u8, u8) {
    let day = instant / SECONDS_PER_DAY;
    let sod = instant % SECONDS_PER_DAY;
    (
        day as u8,
        (sod / 3600) as u8,
        (sod % 3600 / 60) as u8,
        (sod % 60) as u8,
    )
}

pub fn format_instant(instant: u32) -> String {
    let (d, h, m, s) = split_instant(instant);
    format!("{} {h:02}:{m:02}:{s:02}", &DAY_NAMES[d as usize % 7][..3])
}

/// Parse `day:hh:mm` or `day:hh:mm:ss` where `day` is 0-6 or a day name prefix (`mon`).
pub fn parse_day_clock(s: &str) -> Result<u32> {
    let bad = || Error::domain("start", format!("`{s}` is not day:hh:mm[:ss]"));
    let parts: Vec<&str> = s.split(':').collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let day = match parts[0].parse::<u8>() {
        Ok(d) if d < 7 => d,
        Ok(_) => return Err(bad()),
        Err(_) => {
            let lower = parts[0].to_ascii_lowercase();
            if lower.len() < 3 {
                return Err(bad());
            }
            DAY_NAMES
                .iter()
                .position(|n| n.to_ascii_lowercase().starts_with(&lower))
                .ok_or_else(bad)? as u8
        }
    };
    let field = |i: usize, max: u8| -> Result<u8> {
        let v: u8 = parts[i].parse().map_err(|_| bad())?;
        if v > max {
            return Err(bad());
        }
        Ok(v)
    };
    let hour = field(1, 23)?;
    let minute = field(2, 59)?;
    let second = if parts.len() == 4 { field(3, 59)? } else { 0 };
    Ok(week_instant(day, hour, minute, second))
}

/// Parse `HH:MM` into a second of day; `24:00` is accepted as end of day.
pub fn parse_clock(s: &str) -> Option<u32> {
    let (h, m) = s.trim().split_once(':')?;
    let h: u32 = h.parse().ok()?;
    let m: u32 = m.parse().ok()?;
    if m >= 60 || h > 24 || (h == 24 && m != 0) {
        return None;
    }
    Some(h * 3600 + m * 60)
}

pub fn format_clock(sec: u32) -> String {
    format!("{:02}:{:02}", sec / 3600, sec % 3600 / 60)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instant_roundtrip() {
        let i = week_instant(3, 10, 8, 20);
        assert_eq!(split_instant(i), (3, 10, 8, 20));
        assert_eq!(format_instant(i), "Thu 10:08:20");
    }

    #[test]
    fn parse_day_clock_forms() {
        assert_eq!(parse_day_clock("0:10:00").unwrap(), 36_000);
        assert_eq!(parse_day_clock("mon:10:08:20").unwrap(), week_instant(0, 10, 8, 20));
        assert_eq!(parse_day_clock("Sunday:23:59").unwrap(), week_instant(6, 23, 59, 0));
        assert!(parse_day_clock("7:00:00").is_err());
        assert!(parse_day_clock("1:24:00").is_err());
        assert!(parse_day_clock("x:1").is_err());
    }

    #[test]
    fn clock_parse() {
        assert_eq!(parse_clock("07:30"), Some(27_000));
        assert_eq!(parse_clock("24:00"), Some(86_400));
        assert_eq!(parse_clock("24:01"), None);
        assert_eq!(parse_clock("12:60"), None);
        assert_eq!(format_clock(27_000), "07:30");
    }
}
