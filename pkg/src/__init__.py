"""Space-time modulated laminate homogenization package."""
