//! Time-of-day windows and slicing of timed records.

use std::fmt;
use std::str::FromStr;

use super::IngestError;

pub const MINUTES_PER_DAY: u16 = 24 * 60;

/// Minute of the local service day, `0..1440`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MinuteOfDay(u16);

impl MinuteOfDay {
    pub fn new(minute: u16) -> Option<Self> {
        (minute < MINUTES_PER_DAY).then_some(MinuteOfDay(minute))
    }

    pub fn from_hm(hour: u16, minute: u16) -> Option<Self> {
        if hour < 24 && minute < 60 {
            Some(MinuteOfDay(hour * 60 + minute))
        } else {
            None
        }
    }

    pub fn get(self) -> u16 {
        self.0
    }
}

impl FromStr for MinuteOfDay {
    type Err = IngestError;

    /// Accepts `HHMM`, `HMM` or `HH:MM`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || IngestError::Invalid(format!("invalid time of day {s:?}"));
        let s = s.trim();
        let (h, m) = match s.split_once(':') {
            Some(hm) => hm,
            None if (3..=4).contains(&s.len()) => s.split_at(s.len() - 2),
            None => return Err(bad()),
        };
        let hour: u16 = h.parse().map_err(|_| bad())?;
        let minute: u16 = m.parse().map_err(|_| bad())?;
        if m.len() != 2 {
            return Err(bad());
        }
        MinuteOfDay::from_hm(hour, minute).ok_or_else(bad)
    }
}

impl fmt::Display for MinuteOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

/// Half-open window `(start, end]` of minutes, wrapping past midnight when
/// `end < start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeWindow {
    label: String,
    start: u16,
    end: u16,
}

impl TimeWindow {
    /// `start` and `end` are boundary minutes in `0..1440`; `start == end` is rejected.
    pub fn new(label: impl Into<String>, start: u16, end: u16) -> Result<Self, IngestError> {
        if start >= MINUTES_PER_DAY || end >= MINUTES_PER_DAY || start == end {
            return Err(IngestError::Invalid(format!(
                "invalid window bounds ({start}, {end}]"
            )));
        }
        Ok(TimeWindow {
            label: label.into(),
            start,
            end,
        })
    }

    /// A window labeled like `5:01 às 8:00` from its exclusive start and inclusive end.
    pub fn from_bounds(start: u16, end: u16) -> Result<Self, IngestError> {
        let first = (start + 1) % MINUTES_PER_DAY;
        let label = format!(
            "{}:{:02} às {}:{:02}",
            first / 60,
            first % 60,
            end / 60,
            end % 60
        );
        TimeWindow::new(label, start, end)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Exclusive start boundary.
    pub fn start(&self) -> u16 {
        self.start
    }

    /// Inclusive end boundary.
    pub fn end(&self) -> u16 {
        self.end
    }

    /// File-name friendly identifier, `HHMM-HHMM` of the first and last minute.
    pub fn slug(&self) -> String {
        let first = (self.start + 1) % MINUTES_PER_DAY;
        format!(
            "{:02}{:02}-{:02}{:02}",
            first / 60,
            first % 60,
            self.end / 60,
            self.end % 60
        )
    }

    pub fn span_minutes(&self) -> u16 {
        if self.end > self.start {
            self.end - self.start
        } else {
            MINUTES_PER_DAY - self.start + self.end
        }
    }

    pub fn contains(&self, t: MinuteOfDay) -> bool {
        let t = t.get();
        if self.start < self.end {
            self.start < t && t <= self.end
        } else {
            t > self.start || t <= self.end
        }
    }

    /// Whether `name` refers to this window by label or slug.
    pub fn matches(&self, name: &str) -> bool {
        let name = name.trim();
        name == self.label || name == self.slug()
    }
}

/// Ordered list of windows that partitions the day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSchedule {
    windows: Vec<TimeWindow>,
}

const DEFAULT_LABELS: [(&str, u16, u16); 8] = [
    ("2:01 às 5:00", 120, 300),
    ("5:01 às 8:00", 300, 480),
    ("8:01 às 11:00", 480, 660),
    ("11:01 às 14:00", 660, 840),
    ("14:01 às 17:00", 840, 1020),
    ("17:01 às 20:00", 1020, 1200),
    ("20:01 às 23:00", 1200, 1380),
    ("23:01 as 2:00", 1380, 120),
];

impl Default for WindowSchedule {
    /// Eight three-hour windows starting at 2:01.
    fn default() -> Self {
        let windows = DEFAULT_LABELS
            .iter()
            .map(|&(label, start, end)| TimeWindow::new(label, start, end).expect("valid default"))
            .collect();
        WindowSchedule { windows }
    }
}

impl WindowSchedule {
    /// Validates that the windows cover every minute of the day exactly once.
    pub fn new(windows: Vec<TimeWindow>) -> Result<Self, IngestError> {
        if windows.is_empty() {
            return Err(IngestError::Invalid("window schedule is empty".into()));
        }
        let mut owner = vec![None::<usize>; MINUTES_PER_DAY as usize];
        for (i, w) in windows.iter().enumerate() {
            for t in 0..MINUTES_PER_DAY {
                if w.contains(MinuteOfDay(t)) {
                    if let Some(j) = owner[t as usize] {
                        return Err(IngestError::Invalid(format!(
                            "windows {:?} and {:?} overlap at {}",
                            windows[j].label,
                            w.label,
                            MinuteOfDay(t)
                        )));
                    }
                    owner[t as usize] = Some(i);
                }
            }
        }
        if let Some(t) = owner.iter().position(Option::is_none) {
            return Err(IngestError::Invalid(format!(
                "window schedule leaves {} uncovered",
                MinuteOfDay(t as u16)
            )));
        }
        Ok(WindowSchedule { windows })
    }

    pub fn windows(&self) -> &[TimeWindow] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn find(&self, t: MinuteOfDay) -> &TimeWindow {
        self.windows
            .iter()
            .find(|w| w.contains(t))
            .expect("schedule partitions the day")
    }

    pub fn by_name(&self, name: &str) -> Option<&TimeWindow> {
        self.windows.iter().find(|w| w.matches(name))
    }
}

impl FromStr for WindowSchedule {
    type Err = IngestError;

    /// Parses `HH:MM-HH:MM,...`; each pair is (exclusive start, inclusive end).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let windows = s
            .split(',')
            .filter(|part| !part.trim().is_empty())
            .map(|part| {
                let (a, b) = part.trim().split_once('-').ok_or_else(|| {
                    IngestError::Invalid(format!("window {part:?} is not HH:MM-HH:MM"))
                })?;
                let start: MinuteOfDay = parse_boundary(a)?;
                let end: MinuteOfDay = parse_boundary(b)?;
                TimeWindow::from_bounds(start.get(), end.get())
            })
            .collect::<Result<Vec<_>, _>>()?;
        WindowSchedule::new(windows)
    }
}

// `24:00` is accepted as an alias of `00:00` for window boundaries.
fn parse_boundary(s: &str) -> Result<MinuteOfDay, IngestError> {
    let s = s.trim();
    if s == "24:00" || s == "2400" {
        return Ok(MinuteOfDay(0));
    }
    s.parse()
}

/// A record carrying an optional time of day.
pub trait Timed {
    fn timestamp(&self) -> Option<MinuteOfDay>;
}

/// Assigns every record to the unique window containing its timestamp.
///
/// The returned slices follow schedule order, including empty ones.
pub fn slice_by_window<'s, E: Timed + Clone>(
    records: &[E],
    schedule: &'s WindowSchedule,
) -> Result<Vec<(&'s TimeWindow, Vec<E>)>, IngestError> {
    let mut slices: Vec<(&TimeWindow, Vec<E>)> =
        schedule.windows().iter().map(|w| (w, Vec::new())).collect();
    for (i, record) in records.iter().enumerate() {
        let t = record.timestamp().ok_or(IngestError::UntimedRecord(i))?;
        let slot = schedule
            .windows()
            .iter()
            .position(|w| w.contains(t))
            .expect("schedule partitions the day");
        slices[slot].1.push(record.clone());
    }
    Ok(slices)
}
