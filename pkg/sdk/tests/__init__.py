# kickedrotor tests
