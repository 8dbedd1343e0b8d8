//! Pedestrian search in a city of parked cars that switch a short-range
//! reader on and off under a broadcast signal.

pub mod behavior;
mod campaign;
mod city;
mod pedestrian;
mod sim;
mod spatial;

pub use behavior::{classify_and_toss, Class, LogisticBehavior};
pub use campaign::{
    read_campaign_csv, run_campaign, sim_seed, summarize, write_campaign_csv, Campaign, CampaignSummary, Interval, SimRecord,
    CAMPAIGN_SCHEMA,
};
pub use city::{bay_capacity, generate_city, GridCity, Point, Segment};
pub use pedestrian::Pedestrian;
pub use sim::{detect, regulation, run_search, Regulation, SearchOptions, SearchOutcome, SearchRun, SearchScenario, Vehicle};
pub use spatial::{count_neighbors, neighbor_counts, SpatialHash};
