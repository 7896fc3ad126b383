"""Output files: tables, Q-function grids and run manifests."""

from kerrq.io.writers import (
    SCHEMA_VERSION,
    dump_noise_csv,
    moment_columns,
    schema_tag,
    split_complex,
    write_analytic_series,
    write_averaging_report,
    write_divergence_table,
    write_fp_residuals,
    write_manifest,
    write_moment_series,
    write_phase_plane,
    write_product_series,
    write_q_grid,
    write_table,
    write_trajectory,
)

__all__ = [
    "SCHEMA_VERSION",
    "dump_noise_csv",
    "moment_columns",
    "schema_tag",
    "split_complex",
    "write_analytic_series",
    "write_averaging_report",
    "write_divergence_table",
    "write_fp_residuals",
    "write_manifest",
    "write_moment_series",
    "write_phase_plane",
    "write_product_series",
    "write_q_grid",
    "write_table",
    "write_trajectory",
]
