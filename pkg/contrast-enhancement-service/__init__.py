# Contrast Enhancement Service Package
