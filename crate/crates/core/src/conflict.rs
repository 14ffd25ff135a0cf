//! Conflict events and even per-year allocation of their fatalities.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;

/// One catalog row.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConflictEvent {
    pub id: String,
    pub name: String,
    pub region_code: u32,
    pub start_year: i32,
    pub end_year: i32,
    pub fatalities: f64,
}

impl ConflictEvent {
    pub fn new(
        id: String,
        name: String,
        region_code: u32,
        start_year: i32,
        end_year: i32,
        fatalities: f64,
    ) -> Result<Self, Error> {
        if end_year < start_year {
            return Err(Error::InvalidSpan { id, start: start_year, end: end_year });
        }
        Ok(ConflictEvent { id, name, region_code, start_year, end_year, fatalities })
    }

    pub fn duration_years(&self) -> i32 {
        self.end_year - self.start_year + 1
    }
}

/// Contiguous per-year fatality totals.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FatalitySeries {
    pub start_year: i32,
    pub values: Vec<f64>,
}

impl FatalitySeries {
    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.values.len() as i32).map(move |k| self.start_year + k)
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        let idx = year.checked_sub(self.start_year)?;
        if idx < 0 {
            return None;
        }
        self.values.get(idx as usize).copied()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Keep events whose region code is in `codes`.
pub fn filter_regions(events: &[ConflictEvent], codes: &[u32]) -> Vec<ConflictEvent> {
    events
        .iter()
        .filter(|e| codes.contains(&e.region_code))
        .cloned()
        .collect()
}

/// Spread each event's fatalities evenly over its years and sum overlapping
/// events per year. Years inside the span with no event carry an explicit
/// zero so downstream can tell "zero fatalities" from "missing year".
pub fn fatalities_per_year(events: &[ConflictEvent]) -> Result<FatalitySeries, Error> {
    if events.is_empty() {
        return Err(Error::NoEvents);
    }
    let start = events.iter().map(|e| e.start_year).min().unwrap();
    let end = events.iter().map(|e| e.end_year).max().unwrap();
    let mut values = alloc::vec![0.0; (end - start + 1) as usize];
    for event in events {
        let per_year = event.fatalities / event.duration_years() as f64;
        for year in event.start_year..=event.end_year {
            values[(year - start) as usize] += per_year;
        }
    }
    Ok(FatalitySeries { start_year: start, values })
}

/// Midpoint year of a span: `ceil(start + (end - start) / 2)`.
pub fn conflict_midpoint(start: i32, end: i32) -> Result<i32, Error> {
    if end < start {
        return Err(Error::InvalidSpan { id: String::new(), start, end });
    }
    // Integer ceiling of (end - start) / 2.
    Ok(start + (end - start + 1) / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn event(id: &str, region: u32, start: i32, end: i32, deaths: f64) -> ConflictEvent {
        ConflictEvent::new(id.to_string(), id.to_string(), region, start, end, deaths).unwrap()
    }

    #[test]
    fn rejects_inverted_span() {
        let err = ConflictEvent::new("x".into(), "x".into(), 3, 1618, 1617, 10.0).unwrap_err();
        assert_eq!(err, Error::InvalidSpan { id: "x".into(), start: 1618, end: 1617 });
    }

    #[test]
    fn region_filter_keeps_requested_codes() {
        let events = vec![
            event("a", 2, 1600, 1601, 10.0),
            event("b", 3, 1600, 1601, 10.0),
            event("c", 4, 1600, 1601, 10.0),
            event("d", 5, 1600, 1601, 10.0),
        ];
        let kept = filter_regions(&events, &[3, 4]);
        assert_eq!(kept.len(), 2);
        assert!(kept.iter().all(|e| e.region_code == 3 || e.region_code == 4));
        assert!(filter_regions(&events, &[]).is_empty());
        assert_eq!(filter_regions(&events, &[2, 3, 4, 5]).len(), 4);
    }

    #[test]
    fn even_allocation_over_four_years() {
        let series = fatalities_per_year(&[event("a", 3, 1600, 1603, 100.0)]).unwrap();
        assert_eq!(series.start_year, 1600);
        assert_eq!(series.values, vec![25.0, 25.0, 25.0, 25.0]);
    }

    #[test]
    fn single_year_event_keeps_full_count() {
        let series = fatalities_per_year(&[event("a", 3, 1700, 1700, 500.0)]).unwrap();
        assert_eq!(series.values, vec![500.0]);
    }

    #[test]
    fn overlapping_events_sum() {
        // 100 deaths over 1600-1603 (25/yr) + 60 deaths over 1602-1604 (20/yr).
        let series = fatalities_per_year(&[
            event("a", 3, 1600, 1603, 100.0),
            event("b", 3, 1602, 1604, 60.0),
        ])
        .unwrap();
        assert_eq!(series.get(1601), Some(25.0));
        assert_eq!(series.get(1602), Some(45.0));
        assert_eq!(series.get(1604), Some(20.0));
    }

    #[test]
    fn gap_years_are_explicit_zeros() {
        let series = fatalities_per_year(&[
            event("a", 3, 1600, 1600, 10.0),
            event("b", 3, 1605, 1605, 20.0),
        ])
        .unwrap();
        assert_eq!(series.get(1603), Some(0.0));
        assert_eq!(series.values.len(), 6);
    }

    #[test]
    fn mass_is_conserved() {
        let mut state = 77u64;
        let mut next = move |m: u64| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state >> 33 % m
        };
        let mut events = Vec::new();
        for k in 0..200 {
            let start = 1500 + (next(300) % 300) as i32;
            let dur = (next(40) % 40) as i32;
            let deaths = (next(1_000_000) % 1_000_000) as f64 + 1.0;
            events.push(event(&alloc::format!("e{k}"), 3, start, start + dur, deaths));
        }
        let series = fatalities_per_year(&events).unwrap();
        let expect: f64 = events.iter().map(|e| e.fatalities).sum();
        let got = series.total();
        assert!(((got - expect) / expect).abs() < 1e-12);
        assert!(series.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn allocation_is_additive() {
        let set_a = vec![event("a", 3, 1600, 1603, 100.0)];
        let set_b = vec![event("b", 3, 1602, 1604, 60.0)];
        let both = fatalities_per_year(&[set_a.clone(), set_b.clone()].concat()).unwrap();
        let a = fatalities_per_year(&set_a).unwrap();
        let b = fatalities_per_year(&set_b).unwrap();
        for year in both.years() {
            let sum = a.get(year).unwrap_or(0.0) + b.get(year).unwrap_or(0.0);
            assert!((both.get(year).unwrap() - sum).abs() < 1e-12);
        }
    }

    #[test]
    fn midpoints_match_published_set() {
        // The five spans behind {1633, 1693, 1708, 1711, 1759}.
        assert_eq!(conflict_midpoint(1618, 1648).unwrap(), 1633);
        assert_eq!(conflict_midpoint(1688, 1697).unwrap(), 1693);
        assert_eq!(conflict_midpoint(1701, 1714).unwrap(), 1708);
        assert_eq!(conflict_midpoint(1700, 1721).unwrap(), 1711);
        assert_eq!(conflict_midpoint(1756, 1762).unwrap(), 1759);
        assert_eq!(conflict_midpoint(1700, 1700).unwrap(), 1700);
        assert!(conflict_midpoint(1700, 1699).is_err());
    }

    #[test]
    fn no_events_is_an_error() {
        assert_eq!(fatalities_per_year(&[]).unwrap_err(), Error::NoEvents);
    }
}
