def fl_decentralized(nodeId, localData, privateData):
    # The nodes exchange messages, which are lists with 4 elements.
    # The indices of these message elements are the following:
    msgIterNo = 0
    msgSeqNo = 1
    msgSrcAdr = 2
    msgData = 3
    # The msgSeqNo message field can have two values:
    PHASE1 = 1
    PHASE2 = 2
    # Note: missing variables and lists are defined elsewhere
    for iterNo in range(noIterations):
        # This node is initially acting as a server - phase 1
        broadcastMsg(addresses,
                     [iterNo, PHASE1, nodeId, localData], nodeId)
        # This node now acts as a client - phase 2
        noRcvdMsgs = 0
        # First drain the buffer dataFromClients1
        while len(dataFromClients1) > 0:
            msg = dataFromClients1.pop(0)
            noRcvdMsgs = noRcvdMsgs + 1
            sendMsg(msg[msgSrcAdr], [iterNo, PHASE2, nodeId, localData])
        # Process the rest of the messages
        while noRcvdMsgs != 2*noNeighbors:
            msg = rcvMsg()
            # Message from a client already in the iteration iterNo+1?
            if msg[msgIterNo] != iterNo:
                dataFromClients1.append(msg)
                continue
            noRcvdMsgs = noRcvdMsgs + 1
            if msg[msgSeqNo] == PHASE1:
                # The 1st msg from a neighbor acting as a server
                # This node takes the role of a client
                sendMsg(msg[msgSrcAdr],
                        [iterNo, PHASE2, nodeId, localData])
            else:
                # The 2nd msg from a neighbor acting as client
                # This node takes the role of a server
                dataFromClients2.append(msg[msgData])
        # All 2*noNeighbors messages have been processed
        # This node takes the final role of a server - phase 3
        # Consume all the msgs from the dataFromClients2 - drop them
        dropMsgsFromClients2(dataFromClients2)
    # All the iterations are completed
    terminated = 1
