"""Cross-sectional comparison against laboratory cohorts."""
