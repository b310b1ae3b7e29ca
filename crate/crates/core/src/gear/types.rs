//! Core identifiers and configuration for a gear-matrix platform.
//!
//! A platform is a rows x cols mesh of identical gears. Meshing forces
//! synchronized counter-rotation: a gear at (row, col) spins in the positive
//! direction exactly when row + col is even. Each gear carries `channels`
//! straight rails through its center, so a rail occupies a diameter and its
//! orientation lives in [0, 180) degrees.

use std::fmt;

use thiserror::Error;

/// Identifier of a sensor riding the platform. Values come from scenario
/// files and are only required to be unique within a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SensorId(pub u32);

impl fmt::Display for SensorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Grid coordinate of one gear, row-major from the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GearPos {
    pub row: u16,
    pub col: u16,
}

impl GearPos {
    pub fn new(row: u16, col: u16) -> Self {
        Self { row, col }
    }

    /// Spin direction forced by meshing: +1 on even parity, -1 on odd.
    pub fn spin(&self) -> i32 {
        if (self.row + self.col) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Gear-grid Manhattan distance.
    pub fn manhattan(&self, other: &GearPos) -> u32 {
        self.row.abs_diff(other.row) as u32 + self.col.abs_diff(other.col) as u32
    }
}

impl fmt::Display for GearPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// One rail end a sensor can occupy: a channel on a particular gear.
///
/// Channels are indexed 0..C; index k sits at k * 180/C degrees when the
/// gear's rotation offset is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub gear: GearPos,
    pub channel: u16,
}

impl Slot {
    pub fn new(gear: GearPos, channel: u16) -> Self {
        Self { gear, channel }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.gear.row, self.gear.col, self.channel)
    }
}

/// Rejected platform configurations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("grid must have at least one row and one column, got {rows}x{cols}")]
    EmptyGrid { rows: u16, cols: u16 },
    #[error("gears need at least one channel")]
    NoChannels,
    #[error(
        "channel count {channels} gives rotation period {period}, \
         which does not divide 180 degrees evenly"
    )]
    UnevenSlotAngle { channels: u16, period: u16 },
}

/// Validated platform configuration.
///
/// Rotation is discretized: the platform advances in slots of
/// `180 / period()` degrees, where the period is lcm(channels, 2). The
/// constructor rejects channel counts whose period does not divide 180, so
/// all angle arithmetic stays in whole degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridConfig {
    rows: u16,
    cols: u16,
    channels: u16,
}

impl GridConfig {
    pub fn new(rows: u16, cols: u16, channels: u16) -> Result<Self, ConfigError> {
        if rows == 0 || cols == 0 {
            return Err(ConfigError::EmptyGrid { rows, cols });
        }
        if channels == 0 {
            return Err(ConfigError::NoChannels);
        }
        let period = lcm(channels, 2);
        if period > 180 || 180 % period != 0 {
            return Err(ConfigError::UnevenSlotAngle { channels, period });
        }
        Ok(Self {
            rows,
            cols,
            channels,
        })
    }

    pub fn rows(&self) -> u16 {
        self.rows
    }

    pub fn cols(&self) -> u16 {
        self.cols
    }

    pub fn channels(&self) -> u16 {
        self.channels
    }

    /// Number of rotation slots before channel geometry repeats.
    pub fn period(&self) -> u16 {
        lcm(self.channels, 2)
    }

    /// Degrees swept by one rotation slot.
    pub fn slot_degrees(&self) -> u16 {
        180 / self.period()
    }

    /// Angular spacing between adjacent channels of one gear.
    pub fn channel_degrees(&self) -> u16 {
        180 / self.channels
    }

    pub fn gear_count(&self) -> u32 {
        self.rows as u32 * self.cols as u32
    }

    pub fn slot_count(&self) -> u64 {
        self.gear_count() as u64 * self.channels as u64
    }

    pub fn contains(&self, gear: &GearPos) -> bool {
        gear.row < self.rows && gear.col < self.cols
    }

    pub fn contains_slot(&self, slot: &Slot) -> bool {
        self.contains(&slot.gear) && slot.channel < self.channels
    }

    /// Every gear position in row-major order.
    pub fn gears(&self) -> impl Iterator<Item = GearPos> + '_ {
        let cols = self.cols;
        (0..self.rows).flat_map(move |row| (0..cols).map(move |col| GearPos::new(row, col)))
    }

    /// Every slot in row-major, channel-minor order.
    pub fn slots(&self) -> Vec<Slot> {
        let mut slots = Vec::with_capacity(self.slot_count() as usize);
        for gear in self.gears() {
            for channel in 0..self.channels {
                slots.push(Slot::new(gear, channel));
            }
        }
        slots
    }

    /// Gears orthogonally adjacent to `gear`, in N, W, E, S order.
    pub fn neighbors(&self, gear: &GearPos) -> impl Iterator<Item = GearPos> + '_ {
        let (r, c) = (gear.row, gear.col);
        let candidates = [
            (r.checked_sub(1), Some(c)),
            (Some(r), c.checked_sub(1)),
            (Some(r), c.checked_add(1)),
            (r.checked_add(1), Some(c)),
        ];
        let cfg = *self;
        candidates.into_iter().filter_map(move |(row, col)| {
            let pos = GearPos::new(row?, col?);
            cfg.contains(&pos).then_some(pos)
        })
    }
}

/// Most sensors the platform can host while every single-slot rotation stays
/// legal: ceil(rows * cols / 2) * channels, the fully loaded set of gears on
/// one meshing parity.
pub fn capacity(config: &GridConfig) -> u64 {
    let gears = config.gear_count() as u64;
    gears.div_ceil(2) * config.channels() as u64
}

/// The slot classes that stay rotation-legal at full load: all slots on
/// even-parity gears always qualify, and the odd-parity class joins in when
/// it is the same size (even total gear count).
pub fn checkerboard_classes(config: &GridConfig) -> Vec<Vec<Slot>> {
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for slot in config.slots() {
        if (slot.gear.row + slot.gear.col) % 2 == 0 {
            even.push(slot);
        } else {
            odd.push(slot);
        }
    }
    let mut classes = vec![even];
    if odd.len() == classes[0].len() {
        classes.push(odd);
    }
    classes
}

/// Cost coefficients for plan scoring, in seconds of actuation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    /// Cost per degree of platform rotation.
    pub rotation_cost_per_degree: f64,
    /// Cost per sensor transfer across a meshing point.
    pub transfer_cost: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        // 0.38 s per quarter turn and 0.56 s per transfer, measured on the
        // reference hardware.
        Self {
            rotation_cost_per_degree: 0.38 / 90.0,
            transfer_cost: 0.56,
        }
    }
}

fn gcd(a: u16, b: u16) -> u16 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u16, b: u16) -> u16 {
    a / gcd(a, b) * b
}
