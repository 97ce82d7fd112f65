# Management commands for running simulations, bound replays and reports
