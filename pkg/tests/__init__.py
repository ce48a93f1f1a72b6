# Test package for softReasoner
