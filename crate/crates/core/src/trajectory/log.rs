//! Time-ordered record of a trajectory, serialized as JSON lines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{MeasurementRecord, MeasurementSpec, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Evolve,
    Measure,
    BoundaryShift,
    PhaseUpdate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEvent {
    /// Units of `1/J`.
    pub time: f64,
    pub kind: EventKind,
    #[serde(default)]
    pub measured_sites: Vec<usize>,
    #[serde(default)]
    pub outcome: Option<Outcome>,
    /// Differs from `outcome` only on a false negative.
    #[serde(default)]
    pub reported: Option<Outcome>,
    /// Relative phase still to be applied, radians.
    #[serde(default)]
    pub accumulated_phase: f64,
}

impl TrajectoryEvent {
    pub fn evolve(time: f64) -> Self {
        Self {
            time,
            kind: EventKind::Evolve,
            measured_sites: Vec::new(),
            outcome: None,
            reported: None,
            accumulated_phase: 0.0,
        }
    }

    pub fn measure(time: f64, spec: &MeasurementSpec, rec: MeasurementRecord) -> Self {
        Self {
            time,
            kind: EventKind::Measure,
            measured_sites: spec.sites.iter().map(|s| s.get()).collect(),
            outcome: Some(rec.actual),
            reported: Some(rec.reported),
            accumulated_phase: 0.0,
        }
    }

    pub fn boundary_shift(time: f64, measured_sites: Vec<usize>) -> Self {
        Self {
            kind: EventKind::BoundaryShift,
            measured_sites,
            ..Self::evolve(time)
        }
    }

    pub fn phase_update(time: f64, theta: f64) -> Self {
        Self {
            kind: EventKind::PhaseUpdate,
            accumulated_phase: theta,
            ..Self::evolve(time)
        }
    }

    pub fn with_phase(mut self, theta: f64) -> Self {
        self.accumulated_phase = theta;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub seed: u64,
    pub stream: u64,
    pub algorithm: String,
    pub f_meas: Option<f64>,
    pub schedule_digest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLog {
    header: LogHeader,
    events: Vec<TrajectoryEvent>,
}

impl TrajectoryLog {
    pub fn new(header: LogHeader) -> Self {
        Self {
            header,
            events: Vec::new(),
        }
    }

    pub fn header(&self) -> &LogHeader {
        &self.header
    }

    pub fn events(&self) -> &[TrajectoryEvent] {
        &self.events
    }

    /// Appends `event`; times must not decrease.
    pub fn push(&mut self, event: TrajectoryEvent) -> Result<()> {
        if let Some(last) = self.events.last() {
            if event.time < last.time {
                return Err(Error::Schedule(format!(
                    "event at t = {} precedes previous event at t = {}",
                    event.time, last.time
                )));
            }
        }
        self.events.push(event);
        Ok(())
    }

    pub fn outcomes(&self) -> Vec<Outcome> {
        self.events.iter().filter_map(|e| e.outcome).collect()
    }

    /// Header line followed by one line per event.
    pub fn to_json_lines(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_json_lines(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: LogHeader = serde_json::from_str(
            lines
                .next()
                .ok_or_else(|| Error::Schedule("empty log".into()))?,
        )?;
        let mut log = Self::new(header);
        for line in lines {
            log.push(serde_json::from_str(line)?)?;
        }
        Ok(log)
    }
}
