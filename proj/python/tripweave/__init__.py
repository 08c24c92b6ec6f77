"""Driver work-session reconstruction and earnings analytics for anonymized
trip-level ride-share data."""

from ._tripweave import (  # noqa: F401
    ClusterModel,
    DriverRoute,
    IngestStats,
    ReconstructionScore,
    RegionMap,
    RouteMetrics,
    SimOutput,
    SimParams,
    SynthParams,
    TripRecord,
    check_extension,
    cluster_report,
    feature_matrix,
    filter_active,
    haversine_miles,
    kmeans,
    load_region_map,
    monthly_cost_per_hour,
    parse_trips_csv,
    query_candidates,
    regional_cost_per_hour,
    regional_distribution,
    route_metrics,
    score_routes,
    select_k,
    silhouette,
    simulate,
    standardize,
    synth_generate,
    temporal_proportions,
    validate_routes,
    write_trips_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
