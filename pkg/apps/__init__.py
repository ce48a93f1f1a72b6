# Apps directory
