# Contrast Enhancement API Package
