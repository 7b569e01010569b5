//! Time helpers: RFC 3339 (de)serialization pinned to UTC, whole-day
//! differences, and calendar-month indexing.
//!
//! All stored timestamps are UTC. Inputs may carry any explicit offset and
//! are normalized on parse.

use chrono::{DateTime, Datelike, NaiveDate, SecondsFormat, Utc};

pub const SECS_PER_DAY: i64 = 86_400;

/// Serde helpers for `DateTime<Utc>` as an RFC 3339 string ("...Z").
pub mod rfc3339 {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(dt: &DateTime<Utc>, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&format_utc(dt))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(de)?;
        parse_utc(&raw).map_err(de::Error::custom)
    }

    /// Same as above for `Option<DateTime<Utc>>`.
    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(
            dt: &Option<DateTime<Utc>>,
            ser: S,
        ) -> Result<S::Ok, S::Error> {
            match dt {
                Some(dt) => ser.serialize_some(&format_utc(dt)),
                None => ser.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            de: D,
        ) -> Result<Option<DateTime<Utc>>, D::Error> {
            let raw = Option::<String>::deserialize(de)?;
            raw.map(|s| parse_utc(&s).map_err(de::Error::custom))
                .transpose()
        }
    }
}

pub fn format_utc(dt: &DateTime<Utc>) -> String {
    dt.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn parse_utc(raw: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(raw)
        .map(|dt| dt.with_timezone(&Utc))
        .map_err(|e| format!("bad RFC 3339 timestamp {raw:?}: {e}"))
}

/// Whole days from `from` to `to`: floor of exact elapsed seconds / 86,400.
/// Negative when `to` precedes `from`.
pub fn floor_days(from: DateTime<Utc>, to: DateTime<Utc>) -> i64 {
    let secs = to.timestamp() - from.timestamp();
    secs.div_euclid(SECS_PER_DAY)
}

/// Whole days between two calendar dates (`to - from`).
pub fn date_diff_days(from: NaiveDate, to: NaiveDate) -> i64 {
    (to - from).num_days()
}

/// Days from a WHOIS date (midnight UTC) to a timestamp, floored.
pub fn date_to_timestamp_days(from: NaiveDate, to: DateTime<Utc>) -> i64 {
    let start = from
        .and_hms_opt(0, 0, 0)
        .expect("midnight valid")
        .and_utc();
    floor_days(start, to)
}

/// Month index since year 0; consecutive calendar months differ by 1.
pub fn month_index(dt: DateTime<Utc>) -> i64 {
    dt.year() as i64 * 12 + (dt.month0() as i64)
}

/// "YYYY-MM" bucket key for a month index produced by [`month_index`].
pub fn month_key(index: i64) -> String {
    let year = index.div_euclid(12);
    let month = index.rem_euclid(12) + 1;
    format!("{year:04}-{month:02}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> DateTime<Utc> {
        parse_utc(s).unwrap()
    }

    #[test]
    fn floor_days_rounds_toward_minus_infinity() {
        let a = ts("2013-10-01T12:00:00Z");
        assert_eq!(floor_days(a, ts("2013-10-04T11:59:59Z")), 2);
        assert_eq!(floor_days(a, ts("2013-10-04T12:00:00Z")), 3);
        assert_eq!(floor_days(a, ts("2013-10-01T00:00:00Z")), -1);
        assert_eq!(floor_days(a, a), 0);
    }

    #[test]
    fn offsets_normalize_to_utc() {
        let dt = ts("2013-10-05T03:14:00+05:30");
        assert_eq!(format_utc(&dt), "2013-10-04T21:44:00Z");
    }

    #[test]
    fn month_indexing() {
        assert_eq!(
            month_index(ts("2013-10-05T00:00:00Z")) - month_index(ts("2011-10-20T00:00:00Z")),
            24
        );
        assert_eq!(month_key(month_index(ts("2013-01-15T00:00:00Z"))), "2013-01");
    }
}
