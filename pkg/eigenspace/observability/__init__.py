# Observability package
